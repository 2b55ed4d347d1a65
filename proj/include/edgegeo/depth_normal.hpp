#pragma once

#include "edgegeo/geometry.hpp"
#include "edgegeo/gradsig.hpp"
#include "edgegeo/image.hpp"

namespace edgegeo {

/// Per-pixel 3-vector grid; doubles as storage for normal gradients.
using Vec3Map = NormalMap;

enum class NeighborWeightMode { uniform, image_gradient };

/// Weight of neighbor j seen from pixel t. Uniform by default; the
/// image-gradient mode uses exp(-alpha |I(p_j) - I(p_t)|) on luminance.
/// Both modes are symmetric in (j, t).
struct NeighborhoodWeights {
  NeighborWeightMode mode = NeighborWeightMode::uniform;
  const ImageF* image = nullptr;
  double alpha = 1.0;
};

/// Result of the depth-to-normal layer plus the caches its backward pass
/// needs (eigenpairs of the per-pixel scatter matrix).
struct DepthToNormal {
  NormalMap normals;
  std::vector<std::uint8_t> degenerate;  // scatter rank < 2: fell back to (0,0,-1)
  std::vector<std::uint8_t> tie;         // eigengap below threshold: zero gradient
  std::vector<double> eigvals;           // 3 per pixel, descending
  std::vector<double> eigvecs;           // 9 per pixel (v1 v2 v3 row-blocks)
  std::vector<std::int8_t> sign;         // camera-facing flip applied to v3

  std::size_t tie_count() const;
};

/// Per pixel, the unit vector minimizing sum_j w_j ((phi(p_j)-phi(p))^T n)^2,
/// i.e. the least-eigenvalue eigenvector of the 3x3 scatter of weighted
/// neighbor difference vectors, flipped camera-facing (n . phi(p) < 0).
/// Border pixels use their available neighbors. Requires at least 3x3.
DepthToNormal depth_to_normal(const DepthMap& depth, const Intrinsics& K,
                              const NeighborhoodWeights& w = {});

/// Accumulate d(loss)/d(depth) given d(loss)/d(normals), chaining through
/// the first-order eigenvector perturbation of the scatter matrix.
/// Tied and degenerate pixels contribute zero.
void depth_to_normal_vjp(const DepthMap& depth, const Intrinsics& K, const NeighborhoodWeights& w,
                         const DepthToNormal& fwd, const Vec3Map& grad_normals,
                         ScalarMap& grad_depth_accum);

struct NormalToDepth {
  DepthMap refined;
  std::vector<std::uint8_t> flagged;  // retained original depth or clamped: no gradient
};

/// Per pixel, the weighted mean over 8 neighbors of the ray-plane
/// intersection depth (N^T phi(p_j)) / (N^T K^-1 h(p)). Neighbors behind a
/// near-perpendicular ray-plane pairing (|denominator| < 1e-8) are excluded;
/// with every neighbor excluded the original depth is kept and the pixel
/// flagged. Output clamped to >= 1e-6.
NormalToDepth normal_to_depth(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K,
                              const NeighborhoodWeights& w = {});

void normal_to_depth_vjp(const DepthMap& depth, const NormalMap& normals, const Intrinsics& K,
                         const NeighborhoodWeights& w, const NormalToDepth& fwd,
                         const ScalarMap& grad_refined, ScalarMap& grad_depth_accum,
                         Vec3Map& grad_normals_accum);

struct ConsistencyEnergy {
  double value = 0.0;           // mean per-pixel energy
  ScalarMap per_pixel;          // unnormalized per-pixel contributions
};

/// sum_j w_j ((phi(p_j) - phi(p))^T N(p))^2, averaged over pixels.
ConsistencyEnergy consistency_energy(const DepthMap& depth, const NormalMap& normals,
                                     const Intrinsics& K, const NeighborhoodWeights& w = {});

/// Closed-form eigendecomposition of a symmetric 3x3 matrix; eigenvalues
/// descending, eigenvectors orthonormal. Exposed for tests.
void symmetric_eigen3(const Mat3& A, Vec3& eigvals, Mat3& eigvecs);

}  // namespace edgegeo
