#pragma once

// Serial, straight-line reference implementations of the parallel kernels.
// These stay deliberately naive (double loops, direct recomputation) and
// serve as the oracles in the test suite and as the baseline in the
// benchmark tool. Values only; no gradients.

#include "edgegeo/asap.hpp"
#include "edgegeo/depth_normal.hpp"
#include "edgegeo/scene.hpp"
#include "edgegeo/warp.hpp"

namespace edgegeo::ref {

double photometric_value(const ImageF& target, const std::vector<SourceView>& sources,
                         const DepthMap& depth, const Intrinsics& K);

BinaryMap fly_out_mask(const DepthMap& depth, const PoseSE3& pose, const Intrinsics& K,
                       int source_width, int source_height);

double kappa_value(const EdgeMap& edges, int px, int py, int dx, int dy);

double loss_normal_asap_value(const NormalMap& normals, const EdgeMap& edges);

double loss_depth_asap_value(const DepthMap& depth, const EdgeMap& edges, const Intrinsics& K,
                             bool clip);

double loss_edge_reg_value(const EdgeMap& edges);

double loss_smooth_depth2_value(const DepthMap& depth, const ImageF& image, double alpha);

double loss_smooth_normal1_value(const NormalMap& normals, const ImageF& image, double alpha);

double consistency_energy_value(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K);

/// All-pairs forms on small maps (<= 12x12): every ordered pixel pair, with
/// the affinity taken over the Bresenham segment between the endpoints.
double dense_loss_normal_value(const NormalMap& normals, const EdgeMap& edges);

NormalMap depth_to_normal_serial(const DepthMap& depth, const Intrinsics& K);

}  // namespace edgegeo::ref
