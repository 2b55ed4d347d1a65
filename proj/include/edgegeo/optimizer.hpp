#pragma once

#include <functional>
#include <string>

#include "edgegeo/asap.hpp"
#include "edgegeo/warp.hpp"

namespace edgegeo {

/// Free parameters of the direct optimization: per-pixel log-depth and edge
/// logits at level-0 resolution, plus one 6-vector twist per source view
/// (flattened). Depth and edge maps are exp / sigmoid of these, so the
/// positivity and (0,1) range constraints hold by construction.
struct FreeParams {
  ScalarMap log_depth;
  ScalarMap edge_logits;
  std::vector<double> twists;  // 6 per source view

  void validate(std::size_t n_sources) const;
};

struct LossWeights {
  double lambda_vs = 1.0;
  double lambda_d = 2.0;
  double lambda_n = 0.01;
  double lambda_e = 0.15;
  bool consistency = true;  // refine depth through normal_to_depth before the photometric term
  bool clip = true;         // clip negative depth-slope differences (double-edge fix)

  void validate() const;
};

struct SceneInputs {
  ImageF target;
  std::vector<ImageF> sources;
  Intrinsics K;
};

struct TotalLoss {
  double value = 0.0;
  double l_vs = 0.0, l_d = 0.0, l_n = 0.0, l_e = 0.0;  // summed over levels
  ScalarMap grad_logdepth;
  ScalarMap grad_logits;
  std::vector<double> grad_twists;
};

/// Multi-scale weighted sum over `levels` pyramid levels of the photometric
/// term plus the three regularizers, normals derived from depth per level,
/// with the full gradient assembled back to the level-0 parameters through
/// the box-downsampling adjoint.
TotalLoss total_loss(const FreeParams& params, const SceneInputs& inputs, const LossWeights& weights,
                     int levels, KinkSignature* sig = nullptr);

struct OptimizerConfig {
  double step = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int iterations = 1500;
  int levels = 4;
  double tolerance = 1e-7;  // relative loss change over 50 iterations; <= 0 disables
  std::uint64_t seed = 0;
  bool optimize_pose = true;
  // Depth box constraint (projected after each step). Pixels pushed past
  // every source view's frustum lose their photometric anchor entirely;
  // the box bounds that runaway the way the bounded network output does in
  // CNN training.
  double min_depth = 0.05;
  double max_depth = 1000.0;
  // Step multiplier for the edge logits. Edges must traverse the whole
  // sigmoid (several logit units) to gate a crease while depth only has to
  // move a fraction of a log unit to smooth the same crease away; equal
  // per-coordinate speeds lose that race.
  double edge_step_scale = 8.0;

  void validate() const;
};

struct OptimizeTrace {
  struct Row {
    int iteration;
    double total, l_vs, l_d, l_n, l_e;
  };
  std::vector<Row> rows;
  FreeParams final_params;
};

/// Per-parameter moment-estimated gradient descent on the total loss.
/// Deterministic; aborts with a diagnostic naming the offending term if the
/// loss turns non-finite.
OptimizeTrace optimize(const FreeParams& initial, const SceneInputs& inputs,
                       const LossWeights& weights, const OptimizerConfig& config);

/// One named parameter block of a finite-difference check: the live values
/// (mutated in place during probing) and the analytic gradient to compare.
/// A positive h overrides the harness-wide step; aggregate blocks (pose
/// twists) want a small step so that the probe rarely crosses a sampler
/// cell or residual-sign kink anywhere in the image.
struct FdBlock {
  std::string name;
  std::vector<double>* values = nullptr;
  const std::vector<double>* analytic = nullptr;
  double h = 0.0;
};

struct GradCheckBlock {
  std::string name;
  double worst_rel = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // kink signature differed between probe points
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_fd = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  bool pass(double tol) const;
};

/// Central differences on a random subsample of each block, compared
/// against the supplied analytic gradient. Probes whose kink signatures
/// differ between the two evaluation points are excluded and counted.
GradCheckReport gradcheck(const std::function<double(KinkSignature*)>& eval,
                          const std::vector<FdBlock>& blocks, double h, std::size_t samples_per_block,
                          std::uint64_t seed);

/// The FD harness applied to total_loss with blocks log_depth, edge_logits,
/// and one block per source twist.
GradCheckReport gradcheck_total(FreeParams& params, const SceneInputs& inputs,
                                const LossWeights& weights, int levels, double h,
                                std::size_t samples_per_block, std::uint64_t seed);

}  // namespace edgegeo
