#include "ref/reference.hpp"

#include <cmath>

namespace edgegeo::ref {

namespace {

bool in_bounds(int x, int y, int w, int h) { return x >= 0 && y >= 0 && x < w && y < h; }

}  // namespace

double photometric_value(const ImageF& target, const std::vector<SourceView>& sources,
                         const DepthMap& depth, const Intrinsics& K) {
  double total = 0.0;
  long count = 0;
  for (const SourceView& sv : sources) {
    const PoseSE3 T = PoseSE3::exp(sv.twist);
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        const Vec3 p = T.apply(back_project({double(x), double(y)}, depth.at(x, y), K));
        if (!(p.z() > 0)) continue;
        const PixelCoord q = project(p, K);
        if (q.u < -1e-9 || q.v < -1e-9 || q.u > sv.image->width - 1 + 1e-9 ||
            q.v > sv.image->height - 1 + 1e-9)
          continue;
        count += 1;
        for (int c = 0; c < target.channels; ++c)
          total += std::abs(target.at(x, y, c) - bilinear_sample(*sv.image, c, q.u, q.v).value);
      }
    }
  }
  return count ? total / count : 0.0;
}

BinaryMap fly_out_mask(const DepthMap& depth, const PoseSE3& pose, const Intrinsics& K,
                       int source_width, int source_height) {
  BinaryMap mask(depth.width, depth.height);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const Vec3 p = pose.apply(back_project({double(x), double(y)}, depth.at(x, y), K));
      bool ok = p.z() > 0;
      if (ok) {
        const PixelCoord q = project(p, K);
        ok = q.u >= -1e-9 && q.v >= -1e-9 && q.u <= source_width - 1 + 1e-9 &&
             q.v <= source_height - 1 + 1e-9;
      }
      mask.at(x, y) = ok ? 1 : 0;
    }
  }
  return mask;
}

double kappa_value(const EdgeMap& edges, int px, int py, int dx, int dy) {
  const int m = std::max(std::abs(dx), std::abs(dy));
  const int sx = dx == 0 ? 0 : dx / std::abs(dx);
  const int sy = dy == 0 ? 0 : dy / std::abs(dy);
  double mx = 0.0;
  for (int k = 0; k <= m; ++k) mx = std::max(mx, edges.at(px + sx * k, py + sy * k));
  return std::exp(-mx);
}

double loss_normal_asap_value(const NormalMap& normals, const EdgeMap& edges) {
  const int w = normals.width, h = normals.height;
  double total = 0.0;
  long pairs = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int axis = 0; axis < 2; ++axis)
        for (int m : kAsapMagnitudes)
          for (int s = -1; s <= 1; s += 2) {
            const int dx = axis == 0 ? m * s : 0;
            const int dy = axis == 1 ? m * s : 0;
            if (!in_bounds(x + dx, y + dy, w, h)) continue;
            const Vec3 diff = normals.at(x, y) - normals.at(x + dx, y + dy);
            total += diff.cwiseAbs().sum() * kappa_value(edges, x, y, dx, dy);
            pairs += 1;
          }
  return pairs ? total / pairs : 0.0;
}

double loss_depth_asap_value(const DepthMap& depth, const EdgeMap& edges, const Intrinsics& K,
                             bool clip) {
  const int w = depth.width, h = depth.height;
  double total = 0.0;
  long terms = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int axis = 0; axis < 2; ++axis)
        for (int m : kAsapMagnitudes) {
          const int dx = axis == 0 ? m : 0;
          const int dy = axis == 1 ? m : 0;
          if (!in_bounds(x - dx, y - dy, w, h) || !in_bounds(x + dx, y + dy, w, h)) continue;
          const DepthGradientG g = depth_gradient_g(depth, K, x, y, axis, m);
          if (!g.valid) continue;
          const double gmag = clip ? std::max(g.value, 0.0) : std::abs(g.value);
          total += gmag * kappa_value(edges, x, y, dx, dy) * kappa_value(edges, x, y, -dx, -dy);
          terms += 1;
        }
  return terms ? total / terms : 0.0;
}

double loss_edge_reg_value(const EdgeMap& edges) {
  double total = 0.0;
  for (double e : edges.data) total += e * e;
  return total / edges.data.size();
}

double loss_smooth_depth2_value(const DepthMap& depth, const ImageF& image, double alpha) {
  ScalarMap gx, gy;
  image_gradients(image, gx, gy);
  const int w = depth.width, h = depth.height;
  double total = 0.0;
  long terms = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x >= 1 && x < w - 1) {
        total += std::abs(depth.at(x + 1, y) - 2 * depth.at(x, y) + depth.at(x - 1, y)) *
                 std::exp(-alpha * std::abs(gx.at(x, y)));
        terms += 1;
      }
      if (y >= 1 && y < h - 1) {
        total += std::abs(depth.at(x, y + 1) - 2 * depth.at(x, y) + depth.at(x, y - 1)) *
                 std::exp(-alpha * std::abs(gy.at(x, y)));
        terms += 1;
      }
    }
  return terms ? total / terms : 0.0;
}

double loss_smooth_normal1_value(const NormalMap& normals, const ImageF& image, double alpha) {
  ScalarMap gx, gy;
  image_gradients(image, gx, gy);
  const int w = normals.width, h = normals.height;
  double total = 0.0;
  long terms = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x < w - 1) {
        total += (normals.at(x + 1, y) - normals.at(x, y)).cwiseAbs().sum() *
                 std::exp(-alpha * std::abs(gx.at(x, y)));
        terms += 1;
      }
      if (y < h - 1) {
        total += (normals.at(x, y + 1) - normals.at(x, y)).cwiseAbs().sum() *
                 std::exp(-alpha * std::abs(gy.at(x, y)));
        terms += 1;
      }
    }
  return terms ? total / terms : 0.0;
}

double consistency_energy_value(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K) {
  const int w = depth.width, h = depth.height;
  double total = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Vec3 n = normals.at(x, y);
      const Vec3 c = back_project({double(x), double(y)}, depth.at(x, y), K);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!in_bounds(x + dx, y + dy, w, h)) continue;
          const Vec3 d =
              back_project({double(x + dx), double(y + dy)}, depth.at(x + dx, y + dy), K) - c;
          total += d.dot(n) * d.dot(n);
        }
    }
  return total / (static_cast<double>(w) * h);
}

double dense_loss_normal_value(const NormalMap& normals, const EdgeMap& edges) {
  const int w = normals.width, h = normals.height;
  if (w > 12 || h > 12) throw validation_error("dense oracle limited to 12x12");
  double total = 0.0;
  long pairs = 0;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0)
      for (int y1 = 0; y1 < h; ++y1)
        for (int x1 = 0; x1 < w; ++x1) {
          if (x0 == x1 && y0 == y1) continue;
          // max edge over the Bresenham segment, endpoints included
          int x = x0, y = y0;
          const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
          const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
          int err = dx + dy;
          double mx = 0.0;
          while (true) {
            mx = std::max(mx, edges.at(x, y));
            if (x == x1 && y == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
              err += dy;
              x += sx;
            }
            if (e2 <= dx) {
              err += dx;
              y += sy;
            }
          }
          total += (normals.at(x0, y0) - normals.at(x1, y1)).cwiseAbs().sum() * std::exp(-mx);
          pairs += 1;
        }
  return pairs ? total / pairs : 0.0;
}

NormalMap depth_to_normal_serial(const DepthMap& depth, const Intrinsics& K) {
  const int w = depth.width, h = depth.height;
  NormalMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 c = back_project({double(x), double(y)}, depth.at(x, y), K);
      Mat3 M = Mat3::Zero();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!in_bounds(x + dx, y + dy, w, h)) continue;
          const Vec3 d =
              back_project({double(x + dx), double(y + dy)}, depth.at(x + dx, y + dy), K) - c;
          M += d * d.transpose();
        }
      // Smallest eigenvector via power iteration on the shifted matrix.
      const double shift = M.trace() + 1e-12;
      const Mat3 S = shift * Mat3::Identity() - M;
      Vec3 v(0.267261, 0.534522, 0.801784);  // fixed non-axis start
      for (int it = 0; it < 200; ++it) v = (S * v).normalized();
      if (v.dot(c) > 0) v = -v;
      out.set(x, y, v);
    }
  }
  return out;
}

}  // namespace edgegeo::ref
