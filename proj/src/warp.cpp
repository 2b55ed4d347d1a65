#include "edgegeo/warp.hpp"

#include <cmath>

namespace edgegeo {

namespace {

// Samples exactly on the closed border stay valid; the tolerance only
// absorbs floating-point jitter of the reprojection arithmetic.
constexpr double kBorderTol = 1e-9;

// Subgradient of |r| at the kink: residuals below this magnitude count as
// exactly matched and carry zero gradient, so identical frames under the
// identity pose produce identically zero gradients despite resampling
// round-off.
constexpr double kResidualEps = 1e-12;

inline std::int32_t residual_sign(double r) {
  return r > kResidualEps ? 1 : (r < -kResidualEps ? -1 : 0);
}

struct Correspondence {
  Vec3 x_target;  // back-projected point, target frame
  Vec3 x_source;  // after the rigid transform
  PixelCoord q;   // continuous source coordinate
  bool valid = false;
};

inline Correspondence correspond(int px, int py, double depth, const PoseSE3& T, const Intrinsics& K,
                                 int src_w, int src_h) {
  Correspondence c;
  c.x_target = depth * K.ray(px, py);
  c.x_source = T.apply(c.x_target);
  if (c.x_source.z() > 0.0) {
    const double inv_z = 1.0 / c.x_source.z();
    c.q.u = K.fx * c.x_source.x() * inv_z + K.cx;
    c.q.v = K.fy * c.x_source.y() * inv_z + K.cy;
    c.valid = c.q.u >= -kBorderTol && c.q.u <= src_w - 1 + kBorderTol && c.q.v >= -kBorderTol &&
              c.q.v <= src_h - 1 + kBorderTol;
  } else {
    c.q = {-1.0, -1.0};
  }
  return c;
}

}  // namespace

WarpResult warp(const ImageF& source, const DepthMap& target_depth, const PoseSE3& target_to_source,
                const Intrinsics& K) {
  target_depth.validate();
  const int w = target_depth.width, h = target_depth.height;
  WarpResult r;
  r.synthesized = ImageF(w, h, source.channels);
  r.valid_mask = BinaryMap(w, h);
  r.sample_coords.assign(static_cast<size_t>(w) * h, PixelCoord{});

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Correspondence c =
          correspond(x, y, target_depth.at(x, y), target_to_source, K, source.width, source.height);
      r.sample_coords[static_cast<size_t>(y) * w + x] = c.q;
      r.valid_mask.at(x, y) = c.valid ? 1 : 0;
      if (c.x_source.z() > 0.0) {
        for (int ch = 0; ch < source.channels; ++ch)
          r.synthesized.at(x, y, ch) = bilinear_sample(source, ch, c.q.u, c.q.v).value;
      }
    }
  }
  return r;
}

BinaryMap fly_out_mask(const DepthMap& target_depth, const PoseSE3& target_to_source,
                       const Intrinsics& K, int source_width, int source_height) {
  target_depth.validate();
  const int w = target_depth.width, h = target_depth.height;
  BinaryMap mask(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      mask.at(x, y) =
          correspond(x, y, target_depth.at(x, y), target_to_source, K, source_width, source_height)
                  .valid
              ? 1
              : 0;
    }
  }
  return mask;
}

PhotometricLoss photometric_loss(const ImageF& target, const std::vector<SourceView>& sources,
                                 const DepthMap& target_depth, const Intrinsics& K,
                                 KinkSignature* sig) {
  if (sources.empty()) throw validation_error("photometric_loss: at least one source view required");
  if (target.width < 2 || target.height < 2)
    throw validation_error("photometric_loss: target must be at least 2x2");
  if (target.width != target_depth.width || target.height != target_depth.height)
    throw validation_error("photometric_loss: image/depth dimension mismatch");
  target_depth.validate();

  const int w = target.width, h = target.height, nch = target.channels;
  PhotometricLoss out;
  out.grad_logdepth = ScalarMap(w, h);
  out.grad_twist.assign(sources.size(), Vec6::Zero());

  double total = 0.0;
  std::size_t count = 0;

  for (size_t si = 0; si < sources.size(); ++si) {
    const SourceView& sv = sources[si];
    if (!sv.image || sv.image->channels != nch)
      throw validation_error("photometric_loss: source image missing or channel mismatch");
    const PoseSE3 T = PoseSE3::exp(sv.twist);
    const Mat3 Jr = so3_right_jacobian(sv.twist.head<3>());

    // signature layout per pixel: valid, cell_x, cell_y, sign(residual) per channel
    const size_t sig_stride = 3 + static_cast<size_t>(nch);
    const size_t sig_off = sig ? sig->add_block(static_cast<size_t>(w) * h * sig_stride) : 0;

    std::vector<double> row_loss(h, 0.0);
    std::vector<long> row_count(h, 0);
    std::vector<Vec6> row_twist(h, Vec6::Zero());

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double depth = target_depth.at(x, y);
        const Correspondence c = correspond(x, y, depth, T, K, sv.image->width, sv.image->height);
        const size_t soff = sig_off + (static_cast<size_t>(y) * w + x) * sig_stride;
        if (sig) sig->set(soff, c.valid ? 1 : 0);
        if (!c.valid) continue;

        if (sig) {
          int cx, cy;
          bilinear_cell(*sv.image, c.q.u, c.q.v, cx, cy);
          sig->set(soff + 1, cx);
          sig->set(soff + 2, cy);
        }

        const double inv_z = 1.0 / c.x_source.z();
        // d(q)/d(x_source)
        const double du_dx = K.fx * inv_z;
        const double du_dz = -K.fx * c.x_source.x() * inv_z * inv_z;
        const double dv_dy = K.fy * inv_z;
        const double dv_dz = -K.fy * c.x_source.y() * inv_z * inv_z;

        Vec3 dl_dx = Vec3::Zero();  // accumulated over channels
        double pix_loss = 0.0;
        for (int ch = 0; ch < nch; ++ch) {
          const SampleGrad s = bilinear_sample(*sv.image, ch, c.q.u, c.q.v);
          const double res = target.at(x, y, ch) - s.value;
          pix_loss += std::abs(res);
          if (sig) sig->set(soff + 3 + ch, residual_sign(res));
          const double dl_dval = -residual_sign(res);
          const double dl_du = dl_dval * s.du;
          const double dl_dv = dl_dval * s.dv;
          dl_dx.x() += dl_du * du_dx;
          dl_dx.y() += dl_dv * dv_dy;
          dl_dx.z() += dl_du * du_dz + dl_dv * dv_dz;
        }

        row_loss[y] += pix_loss;
        row_count[y] += 1;

        // x_source = R * (depth * ray) + t
        const Vec3 ray = K.ray(x, y);
        out.grad_logdepth.at(x, y) += dl_dx.dot(T.R * ray) * depth;  // d/dlogD = D * d/dD

        Vec6 gt;
        gt.head<3>() = -(T.R * skew(c.x_target) * Jr).transpose() * dl_dx;
        gt.tail<3>() = dl_dx;
        row_twist[y] += gt;
      }
    }

    for (int y = 0; y < h; ++y) {
      total += row_loss[y];
      count += static_cast<std::size_t>(row_count[y]);
      out.grad_twist[si] += row_twist[y];
    }
  }

  out.pixel_count = count;
  if (count > 0) {
    const double inv = 1.0 / static_cast<double>(count);
    out.value = total * inv;
    for (double& g : out.grad_logdepth.data) g *= inv;
    for (Vec6& g : out.grad_twist) g *= inv;
  }
  return out;
}

}  // namespace edgegeo
