#pragma once

#include <optional>
#include <vector>

#include "edgegeo/image.hpp"

namespace edgegeo {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
};

/// Evaluate over masked pixels. With median_align the prediction is first
/// scaled by median(gt)/median(pred) (monocular scale gauge); with a cap
/// both prediction and ground truth are clamped to it.
DepthMetrics eval_depth(const ScalarMap& pred, const ScalarMap& gt, const BinaryMap& mask,
                        std::optional<double> cap = std::nullopt, bool median_align = false);

struct NormalMetrics {
  double mean_deg = 0.0;
  double median_deg = 0.0;
  double frac_under_11_25 = 0.0;
  double frac_under_22_5 = 0.0;
  double frac_under_30 = 0.0;
};

/// Angular error arccos(pred . gt) in degrees; threshold fractions use
/// strict <. Inputs must be unit within 1e-3 on the mask.
NormalMetrics eval_normal(const NormalMap& pred, const NormalMap& gt, const BinaryMap& mask);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EdgeMetrics {
  double ods_f1 = 0.0;
  double ois_f1 = 0.0;
  double ap = 0.0;
  std::vector<PrPoint> pr_curve;  // aggregate, raw (no envelope applied)
};

struct EdgeEvalOptions {
  double match_radius_frac = 0.0075;  // of the image diagonal
  int num_thresholds = 33;            // evenly spaced in [0.01, 0.99]
};

struct EdgeSample {
  const EdgeMap* pred = nullptr;    // soft edge strengths
  const BinaryMap* gt = nullptr;    // binary ground truth (not thinned here)
};

/// Binarize at each threshold, thin the prediction to unit width, match
/// prediction to ground truth greedily by distance within the radius (each
/// pixel on either side used at most once). ODS is the best F1 on counts
/// aggregated over images, OIS the mean of per-image best F1, AP the
/// trapezoidal area under the monotone precision envelope. Images whose gt
/// has no edge pixels are skipped and do not enter any aggregate.
EdgeMetrics eval_edge(const std::vector<EdgeSample>& samples, const EdgeEvalOptions& opts = {});
EdgeMetrics eval_edge(const EdgeMap& pred, const BinaryMap& gt, const EdgeEvalOptions& opts = {});

/// Iterative morphological thinning to unit width (Zhang-Suen).
BinaryMap thin(const BinaryMap& m);

struct MatchCounts {
  std::size_t matched = 0;
  std::size_t total_pred = 0;
  std::size_t total_gt = 0;
};

/// Greedy nearest-first matching within radius_px (Euclidean); ties broken
/// by pixel index for determinism. Radius 0 degenerates to exact overlap.
MatchCounts match_edges(const BinaryMap& pred, const BinaryMap& gt, double radius_px);

}  // namespace edgegeo
