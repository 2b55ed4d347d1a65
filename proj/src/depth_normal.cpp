#include "edgegeo/depth_normal.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace edgegeo {

namespace {

constexpr int kNbrDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kNbrDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

constexpr double kRayPlaneEps = 1e-8;
constexpr double kDepthClamp = 1e-6;

struct WeightEval {
  NeighborWeightMode mode;
  double alpha;
  ScalarMap lum;

  explicit WeightEval(const NeighborhoodWeights& w, int width, int height)
      : mode(w.mode), alpha(w.alpha) {
    if (mode == NeighborWeightMode::image_gradient) {
      if (!w.image || w.image->width != width || w.image->height != height)
        throw validation_error("image-gradient neighborhood weights need a matching image");
      lum = luminance(*w.image);
    }
  }

  double operator()(int x, int y, int nx, int ny) const {
    if (mode == NeighborWeightMode::uniform) return 1.0;
    return std::exp(-alpha * std::abs(lum.at(nx, ny) - lum.at(x, y)));
  }
};

void check_dims(const DepthMap& depth) {
  if (depth.width < 3 || depth.height < 3)
    throw validation_error("depth-normal layers need at least a 3x3 map");
  depth.validate();
}

}  // namespace

void symmetric_eigen3(const Mat3& A, Vec3& eigvals, Mat3& eigvecs) {
  // Scale for conditioning.
  const double m = A.cwiseAbs().maxCoeff();
  if (m == 0.0) {
    eigvals.setZero();
    eigvecs.setIdentity();
    return;
  }
  const Mat3 B = A / m;
  const double q = B.trace() / 3.0;
  const Mat3 C = B - q * Mat3::Identity();
  const double p2 = (C * C).trace() / 6.0;
  const double p = std::sqrt(std::max(p2, 0.0));
  if (p < 1e-14) {
    // Triple eigenvalue.
    eigvals.setConstant(q * m);
    eigvecs.setIdentity();
    return;
  }
  const double r = std::clamp((C / p).determinant() * 0.5, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  const double l2 = 3.0 * q - l1 - l3;
  eigvals = Vec3(l1, l2, l3) * m;

  // Eigenvector of lambda: the largest cross product of rows of (B - lambda I).
  auto vector_for = [&](double lambda_scaled) -> Vec3 {
    const Mat3 D = B - lambda_scaled * Mat3::Identity();
    const Vec3 r0 = D.row(0), r1 = D.row(1), r2 = D.row(2);
    Vec3 best = r0.cross(r1);
    double bn = best.squaredNorm();
    Vec3 c = r0.cross(r2);
    if (c.squaredNorm() > bn) {
      best = c;
      bn = c.squaredNorm();
    }
    c = r1.cross(r2);
    if (c.squaredNorm() > bn) {
      best = c;
      bn = c.squaredNorm();
    }
    if (bn < 1e-28) return Vec3::UnitX();  // repeated eigenvalue; caller flags ties
    return best / std::sqrt(bn);
  };

  Vec3 v1 = vector_for(l1);
  Vec3 v3 = vector_for(l3);
  // Re-orthogonalize against the better-conditioned pair.
  Vec3 v2 = v3.cross(v1);
  const double n2 = v2.norm();
  if (n2 < 1e-12) {
    // v1 and v3 collapsed (ties); build any orthonormal completion.
    v2 = v1.unitOrthogonal();
    v3 = v1.cross(v2);
  } else {
    v2 /= n2;
    v1 = v2.cross(v3);
  }
  eigvecs.row(0) = v1;
  eigvecs.row(1) = v2;
  eigvecs.row(2) = v3;
}

std::size_t DepthToNormal::tie_count() const {
  std::size_t n = 0;
  for (auto t : tie) n += (t != 0);
  return n;
}

DepthToNormal depth_to_normal(const DepthMap& depth, const Intrinsics& K,
                              const NeighborhoodWeights& w) {
  check_dims(depth);
  const int width = depth.width, height = depth.height;
  const WeightEval weight(w, width, height);

  DepthToNormal out;
  out.normals = NormalMap(width, height);
  out.degenerate.assign(static_cast<size_t>(width) * height, 0);
  out.tie.assign(static_cast<size_t>(width) * height, 0);
  out.eigvals.assign(static_cast<size_t>(width) * height * 3, 0.0);
  out.eigvecs.assign(static_cast<size_t>(width) * height * 9, 0.0);
  out.sign.assign(static_cast<size_t>(width) * height, 1);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t idx = static_cast<size_t>(y) * width + x;
      const Vec3 phi_c = depth.at(x, y) * K.ray(x, y);
      Mat3 M = Mat3::Zero();
      for (int j = 0; j < 8; ++j) {
        const int nx = x + kNbrDx[j], ny = y + kNbrDy[j];
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const Vec3 d = depth.at(nx, ny) * K.ray(nx, ny) - phi_c;
        M += weight(x, y, nx, ny) * d * d.transpose();
      }

      Vec3 ev;
      Mat3 V;
      symmetric_eigen3(M, ev, V);
      out.eigvals[idx * 3 + 0] = ev[0];
      out.eigvals[idx * 3 + 1] = ev[1];
      out.eigvals[idx * 3 + 2] = ev[2];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.eigvecs[idx * 9 + 3 * r + c] = V(r, c);

      // The trigonometric eigenvalue formula smears near-double roots by
      // about sqrt(eps) * ev[0], so the rank test must sit above that.
      const bool degenerate = !(ev[1] > 1e-7 * std::max(ev[0], 1e-30));
      const bool tied = (ev[1] - ev[2]) < 1e-9 * std::max(1.0, ev[0]);
      out.degenerate[idx] = degenerate ? 1 : 0;
      out.tie[idx] = (tied || degenerate) ? 1 : 0;

      Vec3 n = V.row(2);
      if (degenerate) {
        out.normals.set(x, y, Vec3(0, 0, -1));
        continue;
      }
      if (n.dot(phi_c) > 0.0) {
        n = -n;
        out.sign[idx] = -1;
      }
      out.normals.set(x, y, n);
    }
  }
  return out;
}

void depth_to_normal_vjp(const DepthMap& depth, const Intrinsics& K, const NeighborhoodWeights& w,
                         const DepthToNormal& fwd, const Vec3Map& grad_normals,
                         ScalarMap& grad_depth_accum) {
  const int width = depth.width, height = depth.height;
  const WeightEval weight(w, width, height);

  // Pass 1: per-pixel symmetrized matrix S = G + G^T with
  // G = sum_{i in {1,2}} (g . v_i) / (l3 - l_i) v_i v3^T, g the upstream
  // gradient after the camera-facing sign.
  std::vector<double> S(static_cast<size_t>(width) * height * 9, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t idx = static_cast<size_t>(y) * width + x;
      if (fwd.tie[idx] || fwd.degenerate[idx]) continue;
      const Vec3 g = fwd.sign[idx] * grad_normals.at(x, y);
      Mat3 V;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) V(r, c) = fwd.eigvecs[idx * 9 + 3 * r + c];
      const double l1 = fwd.eigvals[idx * 3 + 0];
      const double l2 = fwd.eigvals[idx * 3 + 1];
      const double l3 = fwd.eigvals[idx * 3 + 2];
      const Vec3 v1 = V.row(0), v2 = V.row(1), v3 = V.row(2);
      Mat3 G = (g.dot(v1) / (l3 - l1)) * v1 * v3.transpose() +
               (g.dot(v2) / (l3 - l2)) * v2 * v3.transpose();
      const Mat3 Sym = G + G.transpose();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) S[idx * 9 + 3 * r + c] = Sym(r, c);
    }
  }

  // Pass 2: gather. d M(p) = w_j (r_j d_j^T + d_j r_j^T) dD(p_j)
  //                        - w_j (r_p d_j^T + d_j r_p^T) dD(p) summed over j.
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 r_q = K.ray(x, y);
      const Vec3 phi_q = depth.at(x, y) * r_q;
      double acc = 0.0;

      // As the center of its own stencil.
      {
        const size_t idx = static_cast<size_t>(y) * width + x;
        Eigen::Map<const Mat3> Sq(&S[idx * 9]);
        Vec3 md = Vec3::Zero();
        for (int j = 0; j < 8; ++j) {
          const int nx = x + kNbrDx[j], ny = y + kNbrDy[j];
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          md += weight(x, y, nx, ny) * (depth.at(nx, ny) * K.ray(nx, ny) - phi_q);
        }
        acc -= r_q.dot(Sq * md);  // S symmetric
      }

      // As a neighbor in each adjacent stencil.
      for (int j = 0; j < 8; ++j) {
        const int px = x + kNbrDx[j], py = y + kNbrDy[j];
        if (px < 0 || py < 0 || px >= width || py >= height) continue;
        const size_t pidx = static_cast<size_t>(py) * width + px;
        Eigen::Map<const Mat3> Sp(&S[pidx * 9]);
        const Vec3 d = phi_q - depth.at(px, py) * K.ray(px, py);
        acc += weight(px, py, x, y) * r_q.dot(Sp * d);
      }

      grad_depth_accum.at(x, y) += acc;
    }
  }
}

NormalToDepth normal_to_depth(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K,
                              const NeighborhoodWeights& w) {
  check_dims(depth);
  if (normals.width != depth.width || normals.height != depth.height)
    throw validation_error("normal_to_depth: dimension mismatch");
  const int width = depth.width, height = depth.height;
  const WeightEval weight(w, width, height);

  NormalToDepth out;
  out.refined = DepthMap(width, height);
  out.flagged.assign(static_cast<size_t>(width) * height, 0);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t idx = static_cast<size_t>(y) * width + x;
      const Vec3 n = normals.at(x, y);
      const double den = n.dot(K.ray(x, y));
      double wsum = 0.0, dsum = 0.0;
      if (std::abs(den) >= kRayPlaneEps) {
        for (int j = 0; j < 8; ++j) {
          const int nx = x + kNbrDx[j], ny = y + kNbrDy[j];
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const double wt = weight(x, y, nx, ny);
          const Vec3 phi_j = depth.at(nx, ny) * K.ray(nx, ny);
          wsum += wt;
          dsum += wt * n.dot(phi_j) / den;
        }
      }
      if (wsum == 0.0) {
        out.refined.at(x, y) = depth.at(x, y);
        out.flagged[idx] = 1;
        continue;
      }
      const double d = dsum / wsum;
      if (d < kDepthClamp) {
        out.refined.at(x, y) = kDepthClamp;
        out.flagged[idx] = 1;
      } else {
        out.refined.at(x, y) = d;
      }
    }
  }
  return out;
}

void normal_to_depth_vjp(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K,
                         const NeighborhoodWeights& w, const NormalToDepth& fwd,
                         const ScalarMap& grad_refined, ScalarMap& grad_depth_accum,
                         Vec3Map& grad_normals_accum) {
  const int width = depth.width, height = depth.height;
  const WeightEval weight(w, width, height);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t idx = static_cast<size_t>(y) * width + x;

      // Normal gradient: direct per-pixel term.
      if (!fwd.flagged[idx]) {
        const Vec3 n = normals.at(x, y);
        const Vec3 r_p = K.ray(x, y);
        const double den = n.dot(r_p);
        double wsum = 0.0;
        Vec3 gn = Vec3::Zero();
        for (int j = 0; j < 8; ++j) {
          const int nx = x + kNbrDx[j], ny = y + kNbrDy[j];
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const double wt = weight(x, y, nx, ny);
          const Vec3 phi_j = depth.at(nx, ny) * K.ray(nx, ny);
          wsum += wt;
          gn += wt * (phi_j / den - n.dot(phi_j) / (den * den) * r_p);
        }
        const Vec3 add = grad_refined.at(x, y) / wsum * gn;
        grad_normals_accum.set(x, y, grad_normals_accum.at(x, y) + add);
      }

      // Depth gradient, gathered: pixel (x, y) appears as neighbor j in the
      // stencils of its own 8 neighbors.
      const Vec3 r_q = K.ray(x, y);
      double acc = 0.0;
      for (int j = 0; j < 8; ++j) {
        const int px = x + kNbrDx[j], py = y + kNbrDy[j];
        if (px < 0 || py < 0 || px >= width || py >= height) continue;
        const size_t pidx = static_cast<size_t>(py) * width + px;
        if (fwd.flagged[pidx]) continue;
        const Vec3 n = normals.at(px, py);
        const double den = n.dot(K.ray(px, py));
        double wsum = 0.0;
        for (int k = 0; k < 8; ++k) {
          const int kx = px + kNbrDx[k], ky = py + kNbrDy[k];
          if (kx < 0 || ky < 0 || kx >= width || ky >= height) continue;
          wsum += weight(px, py, kx, ky);
        }
        acc += grad_refined.at(px, py) * weight(px, py, x, y) * n.dot(r_q) / (den * wsum);
      }
      grad_depth_accum.at(x, y) += acc;
    }
  }
}

ConsistencyEnergy consistency_energy(const DepthMap& depth, const NormalMap& normals,
                                     const Intrinsics& K, const NeighborhoodWeights& w) {
  check_dims(depth);
  if (normals.width != depth.width || normals.height != depth.height)
    throw validation_error("consistency_energy: dimension mismatch");
  const int width = depth.width, height = depth.height;
  const WeightEval weight(w, width, height);

  ConsistencyEnergy out;
  out.per_pixel = ScalarMap(width, height);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 n = normals.at(x, y);
      const Vec3 phi_c = depth.at(x, y) * K.ray(x, y);
      double e = 0.0;
      for (int j = 0; j < 8; ++j) {
        const int nx = x + kNbrDx[j], ny = y + kNbrDy[j];
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const Vec3 d = depth.at(nx, ny) * K.ray(nx, ny) - phi_c;
        const double proj = d.dot(n);
        e += weight(x, y, nx, ny) * proj * proj;
      }
      out.per_pixel.at(x, y) = e;
    }
  }
  double total = 0.0;
  for (double e : out.per_pixel.data) total += e;
  out.value = total / static_cast<double>(width * height);
  return out;
}

}  // namespace edgegeo
