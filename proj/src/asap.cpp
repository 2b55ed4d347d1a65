#include "edgegeo/asap.hpp"

#include <cmath>

namespace edgegeo {

namespace {

constexpr double kSlopeDenEps = 1e-9;

// A pair also counts as degenerate when the axis denominator falls below
// this fraction of its fronto-parallel nominal (depth * m / f). The 3D
// axis-position profile has an extremum at creases between receding and
// frontal surfaces, so denominators there pass through zero no matter how
// clean the geometry is; an absolute epsilon alone leaves unbounded slope
// quotients.
constexpr double kSlopeDenRel = 0.05;

bool magnitude_ok(int m) { return m == 1 || m == 2 || m == 4 || m == 8; }

// alpha(u) for axis 0 is (u - cx)/fx, for axis 1 (v - cy)/fy; the axis
// component of the back-projection is depth * alpha.
inline double axis_coeff(const Intrinsics& K, int px, int py, int axis) {
  return axis == 0 ? (px - K.cx) / K.fx : (py - K.cy) / K.fy;
}

inline double slope_den_floor(const Intrinsics& K, int axis, int magnitude, double dm, double d0,
                              double dp) {
  const double f = axis == 0 ? K.fx : K.fy;
  const double nominal = magnitude / f * std::min(std::min(dm, d0), dp);
  return std::max(kSlopeDenEps, kSlopeDenRel * nominal);
}

}  // namespace

KappaResult kappa(const EdgeMap& edges, int px, int py, int dx, int dy) {
  if ((dx != 0 && dy != 0) || (dx == 0 && dy == 0) || !magnitude_ok(std::abs(dx + dy)))
    throw validation_error("kappa: offset must be axis-aligned with magnitude in {1,2,4,8}");
  const int m = std::abs(dx + dy);
  const int sx = dx == 0 ? 0 : (dx > 0 ? 1 : -1);
  const int sy = dy == 0 ? 0 : (dy > 0 ? 1 : -1);
  if (px < 0 || py < 0 || px >= edges.width || py >= edges.height || px + dx < 0 || py + dy < 0 ||
      px + dx >= edges.width || py + dy >= edges.height)
    throw validation_error("kappa: segment leaves the image");

  KappaResult r;
  double best = -1.0;
  for (int k = 0; k <= m; ++k) {
    const int x = px + sx * k, y = py + sy * k;
    const double e = edges.at(x, y);
    if (e > best) {  // strict: ties stay with the pixel nearest the near end
      best = e;
      r.argmax_x = x;
      r.argmax_y = y;
    }
  }
  r.value = std::exp(-best);
  return r;
}

LossGrad loss_normal_asap(const NormalMap& normals, const EdgeMap& edges, KinkSignature* sig) {
  if (normals.width != edges.width || normals.height != edges.height)
    throw validation_error("loss_normal_asap: dimension mismatch");
  const int w = normals.width, h = normals.height;

  LossGrad out;
  out.grad_edge = ScalarMap(w, h);
  out.grad_normals = Vec3Map(w, h);

  // signature: per (pixel, signed offset): argmax flat index + 3 diff signs
  const size_t noff = 16;
  const size_t sig_stride = 4;
  const size_t sig_off = sig ? sig->add_block(static_cast<size_t>(w) * h * noff * sig_stride) : 0;

  double total = 0.0;
  std::size_t pairs = 0;

  // Two passes: x offsets write only within a row, y offsets within a column.
  for (int pass = 0; pass < 2; ++pass) {
    const int lanes = pass == 0 ? h : w;
    std::vector<double> lane_total(lanes, 0.0);
    std::vector<long> lane_pairs(lanes, 0);

#pragma omp parallel for schedule(static)
    for (int lane = 0; lane < lanes; ++lane) {
      for (int along = 0; along < (pass == 0 ? w : h); ++along) {
        const int x = pass == 0 ? along : lane;
        const int y = pass == 0 ? lane : along;
        for (int mi = 0; mi < 4; ++mi) {
          for (int s = -1; s <= 1; s += 2) {
            const int m = kAsapMagnitudes[mi] * s;
            const int dx = pass == 0 ? m : 0;
            const int dy = pass == 0 ? 0 : m;
            const int qx = x + dx, qy = y + dy;
            // offset slot index: pass*8 + mi*2 + (s>0)
            const size_t oslot = static_cast<size_t>(pass) * 8 + mi * 2 + (s > 0 ? 1 : 0);
            const size_t soff = sig ? sig_off + ((static_cast<size_t>(y) * w + x) * noff + oslot) * sig_stride : 0;
            if (qx < 0 || qy < 0 || qx >= w || qy >= h) {
              if (sig) sig->set(soff, -1);
              continue;
            }
            const KappaResult kp = kappa(edges, x, y, dx, dy);
            const Vec3 diff = normals.at(x, y) - normals.at(qx, qy);
            const double l1 = diff.cwiseAbs().sum();
            lane_total[lane] += l1 * kp.value;
            lane_pairs[lane] += 1;

            const Vec3 sgn(sign_of(diff.x()), sign_of(diff.y()), sign_of(diff.z()));
            out.grad_normals.set(x, y, out.grad_normals.at(x, y) + kp.value * sgn);
            out.grad_normals.set(qx, qy, out.grad_normals.at(qx, qy) - kp.value * sgn);
            out.grad_edge.at(kp.argmax_x, kp.argmax_y) -= l1 * kp.value;

            if (sig) {
              sig->set(soff, kp.argmax_y * w + kp.argmax_x);
              sig->set(soff + 1, sign_of(diff.x()));
              sig->set(soff + 2, sign_of(diff.y()));
              sig->set(soff + 3, sign_of(diff.z()));
            }
          }
        }
      }
    }
    for (int lane = 0; lane < lanes; ++lane) {
      total += lane_total[lane];
      pairs += static_cast<std::size_t>(lane_pairs[lane]);
    }
  }

  out.pair_count = pairs;
  if (pairs > 0) {
    const double inv = 1.0 / static_cast<double>(pairs);
    out.value = total * inv;
    for (double& g : out.grad_edge.data) g *= inv;
    for (double& g : out.grad_normals.data) g *= inv;
  }
  return out;
}

DepthGradientG depth_gradient_g(const DepthMap& depth, const Intrinsics& K, int px, int py,
                                int axis, int magnitude) {
  if (axis != 0 && axis != 1) throw validation_error("depth_gradient_g: axis must be 0 or 1");
  if (!magnitude_ok(magnitude)) throw validation_error("depth_gradient_g: magnitude must be in {1,2,4,8}");
  const int dx = axis == 0 ? magnitude : 0;
  const int dy = axis == 1 ? magnitude : 0;
  if (px - dx < 0 || py - dy < 0 || px + dx >= depth.width || py + dy >= depth.height)
    throw validation_error("depth_gradient_g: offset pixels out of bounds");

  const double d0 = depth.at(px, py);
  const double dp = depth.at(px + dx, py + dy);
  const double dm = depth.at(px - dx, py - dy);
  const double a0 = axis_coeff(K, px, py, axis);
  const double ap = axis_coeff(K, px + dx, py + dy, axis);
  const double am = axis_coeff(K, px - dx, py - dy, axis);

  const double den1 = dp * ap - d0 * a0;
  const double den2 = d0 * a0 - dm * am;
  DepthGradientG g;
  const double floor = slope_den_floor(K, axis, magnitude, dm, d0, dp);
  if (std::abs(den1) < floor || std::abs(den2) < floor) return g;
  g.valid = true;
  g.value = (dp - d0) / den1 - (d0 - dm) / den2;
  return g;
}

LossGrad loss_depth_asap(const DepthMap& depth, const EdgeMap& edges, const Intrinsics& K,
                         bool clip, KinkSignature* sig) {
  if (depth.width != edges.width || depth.height != edges.height)
    throw validation_error("loss_depth_asap: dimension mismatch");
  const int w = depth.width, h = depth.height;

  LossGrad out;
  out.grad_depth = ScalarMap(w, h);
  out.grad_edge = ScalarMap(w, h);

  // signature: per (pixel, axis, magnitude): valid, g state, two argmaxes
  const size_t sig_stride = 4;
  const size_t sig_off = sig ? sig->add_block(static_cast<size_t>(w) * h * 8 * sig_stride) : 0;

  double total = 0.0;
  std::size_t terms = 0, degenerate = 0;

  for (int axis = 0; axis < 2; ++axis) {
    const int lanes = axis == 0 ? h : w;
    std::vector<double> lane_total(lanes, 0.0);
    std::vector<long> lane_terms(lanes, 0), lane_degen(lanes, 0);

#pragma omp parallel for schedule(static)
    for (int lane = 0; lane < lanes; ++lane) {
      for (int along = 0; along < (axis == 0 ? w : h); ++along) {
        const int x = axis == 0 ? along : lane;
        const int y = axis == 0 ? lane : along;
        for (int mi = 0; mi < 4; ++mi) {
          const int m = kAsapMagnitudes[mi];
          const int dx = axis == 0 ? m : 0;
          const int dy = axis == 1 ? m : 0;
          const size_t soff =
              sig ? sig_off + ((static_cast<size_t>(y) * w + x) * 8 + axis * 4 + mi) * sig_stride : 0;
          if (x - dx < 0 || y - dy < 0 || x + dx >= w || y + dy >= h) {
            if (sig) sig->set(soff, -1);
            continue;
          }

          const double d0 = depth.at(x, y);
          const double dp = depth.at(x + dx, y + dy);
          const double dm = depth.at(x - dx, y - dy);
          const double a0 = axis_coeff(K, x, y, axis);
          const double ap = axis_coeff(K, x + dx, y + dy, axis);
          const double am = axis_coeff(K, x - dx, y - dy, axis);
          const double den1 = dp * ap - d0 * a0;
          const double den2 = d0 * a0 - dm * am;
          const double floor = slope_den_floor(K, axis, m, dm, d0, dp);
          if (std::abs(den1) < floor || std::abs(den2) < floor) {
            lane_degen[lane] += 1;
            if (sig) sig->set(soff, -2);
            continue;
          }

          const double num1 = dp - d0;
          const double num2 = d0 - dm;
          const double g = num1 / den1 - num2 / den2;
          // d|g'|/dg: clipped -> step at 0 (subgradient 0 there),
          // unclipped -> sign(g).
          const double dg = clip ? (g > 0.0 ? 1.0 : 0.0) : static_cast<double>(sign_of(g));
          const double gmag = clip ? std::max(g, 0.0) : std::abs(g);

          const KappaResult k1 = kappa(edges, x, y, dx, dy);
          const KappaResult k2 = kappa(edges, x, y, -dx, -dy);
          const double kk = k1.value * k2.value;

          lane_total[lane] += gmag * kk;
          lane_terms[lane] += 1;

          if (dg != 0.0) {
            const double scale = dg * kk;
            // Each slope's numerator and denominator both carry depth:
            // slope = (D_b - D_a) / (D_b a_b - D_a a_a).
            const double ds1_dp = (den1 - num1 * ap) / (den1 * den1);
            const double ds1_d0 = (-den1 + num1 * a0) / (den1 * den1);
            const double ds2_d0 = (den2 - num2 * a0) / (den2 * den2);
            const double ds2_dm = (-den2 + num2 * am) / (den2 * den2);
            out.grad_depth.at(x + dx, y + dy) += scale * ds1_dp;
            out.grad_depth.at(x, y) += scale * (ds1_d0 - ds2_d0);
            out.grad_depth.at(x - dx, y - dy) += scale * (-ds2_dm);
          }
          out.grad_edge.at(k1.argmax_x, k1.argmax_y) -= gmag * kk;
          out.grad_edge.at(k2.argmax_x, k2.argmax_y) -= gmag * kk;

          if (sig) {
            sig->set(soff, 1);
            sig->set(soff + 1, clip ? (g > 0.0 ? 1 : 0) : sign_of(g));
            sig->set(soff + 2, k1.argmax_y * w + k1.argmax_x);
            sig->set(soff + 3, k2.argmax_y * w + k2.argmax_x);
          }
        }
      }
    }
    for (int lane = 0; lane < lanes; ++lane) {
      total += lane_total[lane];
      terms += static_cast<std::size_t>(lane_terms[lane]);
      degenerate += static_cast<std::size_t>(lane_degen[lane]);
    }
  }

  out.pair_count = terms;
  out.degenerate_count = degenerate;
  if (terms > 0) {
    const double inv = 1.0 / static_cast<double>(terms);
    out.value = total * inv;
    for (double& g : out.grad_depth.data) g *= inv;
    for (double& g : out.grad_edge.data) g *= inv;
  }
  return out;
}

LossGrad loss_edge_reg(const EdgeMap& edges) {
  LossGrad out;
  out.grad_edge = ScalarMap(edges.width, edges.height);
  const size_t n = edges.data.size();
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    total += edges.data[i] * edges.data[i];
    out.grad_edge.data[i] = 2.0 * edges.data[i] / static_cast<double>(n);
  }
  out.value = total / static_cast<double>(n);
  out.pair_count = n;
  return out;
}

namespace {

// Shared scaffolding for the image-weighted smoothness pair.
struct SmoothnessWeights {
  ScalarMap wx, wy;
  SmoothnessWeights(const ImageF& image, double alpha) {
    ScalarMap gx, gy;
    image_gradients(image, gx, gy);
    wx = ScalarMap(image.width, image.height);
    wy = ScalarMap(image.width, image.height);
    for (size_t i = 0; i < gx.data.size(); ++i) {
      wx.data[i] = std::exp(-alpha * std::abs(gx.data[i]));
      wy.data[i] = std::exp(-alpha * std::abs(gy.data[i]));
    }
  }
};

}  // namespace

LossGrad loss_smooth_depth2(const DepthMap& depth, const ImageF& image, double alpha,
                            KinkSignature* sig) {
  if (depth.width != image.width || depth.height != image.height)
    throw validation_error("loss_smooth_depth2: dimension mismatch");
  const int w = depth.width, h = depth.height;
  const SmoothnessWeights sw(image, alpha);

  LossGrad out;
  out.grad_depth = ScalarMap(w, h);
  const size_t sig_off = sig ? sig->add_block(static_cast<size_t>(w) * h * 2) : 0;

  double total = 0.0;
  std::size_t terms = 0;
  for (int axis = 0; axis < 2; ++axis) {
    const int dx = axis == 0 ? 1 : 0, dy = axis == 1 ? 1 : 0;
    for (int y = dy; y < h - dy; ++y) {
      for (int x = dx; x < w - dx; ++x) {
        const double second =
            depth.at(x + dx, y + dy) - 2.0 * depth.at(x, y) + depth.at(x - dx, y - dy);
        const double wt = axis == 0 ? sw.wx.at(x, y) : sw.wy.at(x, y);
        total += std::abs(second) * wt;
        terms += 1;
        const double s = sign_of(second) * wt;
        out.grad_depth.at(x + dx, y + dy) += s;
        out.grad_depth.at(x, y) += -2.0 * s;
        out.grad_depth.at(x - dx, y - dy) += s;
        if (sig) sig->set(sig_off + (static_cast<size_t>(y) * w + x) * 2 + axis, sign_of(second));
      }
    }
  }
  out.pair_count = terms;
  if (terms > 0) {
    out.value = total / static_cast<double>(terms);
    for (double& g : out.grad_depth.data) g /= static_cast<double>(terms);
  }
  return out;
}

LossGrad loss_smooth_normal1(const NormalMap& normals, const ImageF& image, double alpha,
                             KinkSignature* sig) {
  if (normals.width != image.width || normals.height != image.height)
    throw validation_error("loss_smooth_normal1: dimension mismatch");
  const int w = normals.width, h = normals.height;
  const SmoothnessWeights sw(image, alpha);

  LossGrad out;
  out.grad_normals = Vec3Map(w, h);
  const size_t sig_off = sig ? sig->add_block(static_cast<size_t>(w) * h * 2 * 3) : 0;

  double total = 0.0;
  std::size_t terms = 0;
  for (int axis = 0; axis < 2; ++axis) {
    const int dx = axis == 0 ? 1 : 0, dy = axis == 1 ? 1 : 0;
    for (int y = 0; y < h - dy; ++y) {
      for (int x = 0; x < w - dx; ++x) {
        const Vec3 diff = normals.at(x + dx, y + dy) - normals.at(x, y);
        const double wt = axis == 0 ? sw.wx.at(x, y) : sw.wy.at(x, y);
        total += diff.cwiseAbs().sum() * wt;
        terms += 1;
        const Vec3 sgn(sign_of(diff.x()), sign_of(diff.y()), sign_of(diff.z()));
        out.grad_normals.set(x + dx, y + dy, out.grad_normals.at(x + dx, y + dy) + wt * sgn);
        out.grad_normals.set(x, y, out.grad_normals.at(x, y) - wt * sgn);
        if (sig) {
          const size_t o = sig_off + ((static_cast<size_t>(y) * w + x) * 2 + axis) * 3;
          sig->set(o, sign_of(diff.x()));
          sig->set(o + 1, sign_of(diff.y()));
          sig->set(o + 2, sign_of(diff.z()));
        }
      }
    }
  }
  out.pair_count = terms;
  if (terms > 0) {
    out.value = total / static_cast<double>(terms);
    for (double& g : out.grad_normals.data) g /= static_cast<double>(terms);
  }
  return out;
}

EdgeMap sigmoid_map(const ScalarMap& logits) {
  EdgeMap e;
  static_cast<ScalarMap&>(e) = ScalarMap(logits.width, logits.height);
  for (size_t i = 0; i < logits.data.size(); ++i) e.data[i] = 1.0 / (1.0 + std::exp(-logits.data[i]));
  return e;
}

DepthMap exp_map(const ScalarMap& log_depth) {
  DepthMap d;
  static_cast<ScalarMap&>(d) = ScalarMap(log_depth.width, log_depth.height);
  for (size_t i = 0; i < log_depth.data.size(); ++i) d.data[i] = std::exp(log_depth.data[i]);
  return d;
}

ScalarMap to_logdepth_grad(const ScalarMap& grad_depth, const DepthMap& depth) {
  ScalarMap g(grad_depth.width, grad_depth.height);
  for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = grad_depth.data[i] * depth.data[i];
  return g;
}

ScalarMap to_logit_grad(const ScalarMap& grad_edge, const EdgeMap& edges) {
  ScalarMap g(grad_edge.width, grad_edge.height);
  for (size_t i = 0; i < g.data.size(); ++i)
    g.data[i] = grad_edge.data[i] * edges.data[i] * (1.0 - edges.data[i]);
  return g;
}

AsapLossBundle asap_bundle(const DepthMap& depth, const ScalarMap& edge_logits, const Intrinsics& K,
                           const AsapWeights& weights, const NeighborhoodWeights& nb,
                           KinkSignature* sig) {
  const EdgeMap edges = sigmoid_map(edge_logits);
  const DepthToNormal d2n = depth_to_normal(depth, K, nb);
  if (sig && d2n.tie_count() > 0) sig->hard_exclude = true;

  const LossGrad ln = loss_normal_asap(d2n.normals, edges, sig);
  const LossGrad ld = loss_depth_asap(depth, edges, K, weights.clip, sig);
  const LossGrad le = loss_edge_reg(edges);

  AsapLossBundle out;
  out.l_n = ln.value;
  out.l_d = ld.value;
  out.l_e = le.value;

  ScalarMap grad_depth(depth.width, depth.height);
  for (size_t i = 0; i < grad_depth.data.size(); ++i)
    grad_depth.data[i] = weights.lambda_d * ld.grad_depth.data[i];

  // Normal-term gradient flows to depth through the depth-to-normal layer.
  if (weights.lambda_n != 0.0) {
    Vec3Map gn(depth.width, depth.height);
    for (size_t i = 0; i < gn.data.size(); ++i) gn.data[i] = weights.lambda_n * ln.grad_normals.data[i];
    depth_to_normal_vjp(depth, K, nb, d2n, gn, grad_depth);
  }

  ScalarMap grad_edge(depth.width, depth.height);
  for (size_t i = 0; i < grad_edge.data.size(); ++i)
    grad_edge.data[i] = weights.lambda_n * ln.grad_edge.data[i] +
                        weights.lambda_d * ld.grad_edge.data[i] +
                        weights.lambda_e * le.grad_edge.data[i];

  out.grad_logdepth = to_logdepth_grad(grad_depth, depth);
  out.grad_logits = to_logit_grad(grad_edge, edges);
  return out;
}

}  // namespace edgegeo
