#pragma once

#include <vector>

#include "edgegeo/geometry.hpp"
#include "edgegeo/gradsig.hpp"
#include "edgegeo/image.hpp"

namespace edgegeo {

/// Inverse-warp output. valid_mask is false wherever the sample coordinate
/// leaves the closed source rectangle [0, W-1] x [0, H-1] (fly-out) or the
/// transformed point lands at z <= 0.
struct WarpResult {
  ImageF synthesized;
  BinaryMap valid_mask;
  std::vector<PixelCoord> sample_coords;
};

/// A source view paired with the transform from the target camera into it.
struct SourceView {
  const ImageF* image = nullptr;
  Vec6 twist = Vec6::Zero();  // target -> source
};

struct PhotometricLoss {
  double value = 0.0;
  ScalarMap grad_logdepth;
  std::vector<Vec6> grad_twist;  // one per source
  std::size_t pixel_count = 0;   // valid (pixel, source) contributions
};

/// Resample I_s at the projections of the target pixels' back-projections.
WarpResult warp(const ImageF& source, const DepthMap& target_depth, const PoseSE3& target_to_source,
                const Intrinsics& K);

/// Validity mask alone; pure function of (depth, pose, intrinsics, dims).
BinaryMap fly_out_mask(const DepthMap& target_depth, const PoseSE3& target_to_source,
                       const Intrinsics& K, int source_width, int source_height);

/// Mean over valid (pixel, source) pairs of the channel-summed absolute
/// photometric difference, with exact gradients w.r.t. per-pixel log-depth
/// and the per-source pose twists. Masked pixels contribute zero loss and
/// zero gradient; the mask itself carries no gradient.
PhotometricLoss photometric_loss(const ImageF& target, const std::vector<SourceView>& sources,
                                 const DepthMap& target_depth, const Intrinsics& K,
                                 KinkSignature* sig = nullptr);

}  // namespace edgegeo
