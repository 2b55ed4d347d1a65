#pragma once

#include <array>

#include "edgegeo/depth_normal.hpp"
#include "edgegeo/geometry.hpp"
#include "edgegeo/gradsig.hpp"
#include "edgegeo/image.hpp"

namespace edgegeo {

/// Neighborhood magnitudes along x and along y; with both signs this yields
/// 16 neighbors per interior pixel.
inline constexpr std::array<int, 4> kAsapMagnitudes = {1, 2, 4, 8};

struct KappaResult {
  double value = 1.0;
  int argmax_x = 0;  // pixel receiving the max subgradient
  int argmax_y = 0;
};

/// exp(-max edge strength over the inclusive segment from (px, py) to
/// (px + dx, py + dy)). Offset must be axis-aligned with magnitude in
/// {1, 2, 4, 8} and the segment inside the image. The max subgradient is
/// routed to the arg-max pixel alone, ties toward the near end.
KappaResult kappa(const EdgeMap& edges, int px, int py, int dx, int dy);

/// Common result shape for the regularizers. Gradients are w.r.t. the
/// direct inputs (depth values, edge strengths, normal components); the
/// log-depth / logit chain is applied by the caller.
struct LossGrad {
  double value = 0.0;
  ScalarMap grad_depth;
  ScalarMap grad_edge;
  Vec3Map grad_normals;
  std::size_t pair_count = 0;
  std::size_t degenerate_count = 0;
};

/// Mean over valid (pixel, offset) pairs of |N(p) - N(p+o)|_1 kappa(p, o).
LossGrad loss_normal_asap(const NormalMap& normals, const EdgeMap& edges,
                          KinkSignature* sig = nullptr);

struct DepthGradientG {
  double value = 0.0;
  bool valid = false;  // false when a slope denominator fell below 1e-9
};

/// Difference of the two one-sided depth-over-3D-position slopes around
/// (px, py): axis 0 samples (px +- magnitude, py) against the x component
/// of the back-projection, axis 1 the y analogue. Zero iff the three
/// back-projected points are colinear.
DepthGradientG depth_gradient_g(const DepthMap& depth, const Intrinsics& K, int px, int py,
                                int axis, int magnitude);

/// Mean over valid (pixel, axis, magnitude) triples of
/// |g'|_1 kappa(p, +m) kappa(p, -m). With clip, g' = max(g, 0) and the
/// subgradient at 0 is 0; without clip g' = g (double-edge ablation).
LossGrad loss_depth_asap(const DepthMap& depth, const EdgeMap& edges, const Intrinsics& K,
                         bool clip, KinkSignature* sig = nullptr);

/// Mean of squared edge strength; favors predicting no edges.
LossGrad loss_edge_reg(const EdgeMap& edges);

/// L1 of second depth differences along x and y, weighted by
/// exp(-alpha |grad I|), averaged over valid (pixel, axis) pairs.
LossGrad loss_smooth_depth2(const DepthMap& depth, const ImageF& image, double alpha,
                            KinkSignature* sig = nullptr);

/// First-order analogue on normals.
LossGrad loss_smooth_normal1(const NormalMap& normals, const ImageF& image, double alpha,
                             KinkSignature* sig = nullptr);

/// Chain helpers between free parameters and map values.
EdgeMap sigmoid_map(const ScalarMap& logits);
DepthMap exp_map(const ScalarMap& log_depth);
ScalarMap to_logdepth_grad(const ScalarMap& grad_depth, const DepthMap& depth);
ScalarMap to_logit_grad(const ScalarMap& grad_edge, const EdgeMap& edges);

/// The three regularizers evaluated together on one scale, weighted, with
/// gradients chained to log-depth (through the depth-to-normal layer for
/// the normal term) and to edge logits.
struct AsapLossBundle {
  double l_n = 0.0;
  double l_d = 0.0;
  double l_e = 0.0;
  ScalarMap grad_logdepth;
  ScalarMap grad_logits;
};

struct AsapWeights {
  double lambda_d = 2.0;
  double lambda_n = 0.01;
  double lambda_e = 0.15;
  bool clip = true;
};

AsapLossBundle asap_bundle(const DepthMap& depth, const ScalarMap& edge_logits, const Intrinsics& K,
                           const AsapWeights& weights, const NeighborhoodWeights& nb = {},
                           KinkSignature* sig = nullptr);

}  // namespace edgegeo
