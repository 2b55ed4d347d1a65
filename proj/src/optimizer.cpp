#include "edgegeo/optimizer.hpp"

#include <cmath>
#include <random>

namespace edgegeo {

void FreeParams::validate(std::size_t n_sources) const {
  if (log_depth.width != edge_logits.width || log_depth.height != edge_logits.height)
    throw validation_error("free parameters: log-depth / edge-logit dimension mismatch");
  if (twists.size() != n_sources * 6)
    throw validation_error("free parameters: need one 6-vector twist per source view");
  for (double v : log_depth.data)
    if (!std::isfinite(v) || !std::isfinite(std::exp(v)))
      throw validation_error("free parameters: log-depth entry not finite");
  for (double v : edge_logits.data)
    if (!std::isfinite(v)) throw validation_error("free parameters: edge logit not finite");
}

void LossWeights::validate() const {
  if (lambda_vs < 0 || lambda_d < 0 || lambda_n < 0 || lambda_e < 0)
    throw validation_error("loss weights must be non-negative");
  if (lambda_vs == 0 && lambda_d == 0 && lambda_n == 0 && lambda_e == 0)
    throw validation_error("loss weights must not all be zero");
}

void OptimizerConfig::validate() const {
  if (!(step > 0)) throw validation_error("optimizer step must be positive");
  if (levels < 1) throw validation_error("optimizer needs at least one pyramid level");
  if (iterations < 1) throw validation_error("optimizer needs a positive iteration budget");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw validation_error("moment decays must lie in [0, 1)");
  if (!(min_depth > 0) || !(max_depth > min_depth))
    throw validation_error("depth box must satisfy 0 < min < max");
  if (!(edge_step_scale > 0)) throw validation_error("edge step scale must be positive");
}

namespace {

struct LevelData {
  DepthMap depth;
  EdgeMap edges;
  std::vector<std::int32_t> edge_argmax;  // child index behind each pooled entry
  ImageF target;
  std::vector<ImageF> sources;
  Intrinsics K;
};

// Edge pyramids for gating are max-pooled rather than box-averaged: a
// coarse cell contains an edge iff any child does, so a unit-width crease
// edge keeps gating the coarse smoothness pairs instead of diluting to a
// fraction of its strength. The subgradient routes to the max child, the
// same convention the affinity max uses.
EdgeMap downsample_edges_max(const EdgeMap& fine, std::vector<std::int32_t>& argmax) {
  EdgeMap out;
  static_cast<ScalarMap&>(out) = ScalarMap(fine.width / 2, fine.height / 2);
  argmax.assign(out.data.size(), 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double best = -1.0;
      std::int32_t best_idx = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int fx = 2 * x + dx, fy = 2 * y + dy;
          const double v = fine.at(fx, fy);
          if (v > best) {
            best = v;
            best_idx = fy * fine.width + fx;
          }
        }
      out.at(x, y) = best;
      argmax[static_cast<size_t>(y) * out.width + x] = best_idx;
    }
  }
  return out;
}

void pool_adjoint_accum(const ScalarMap& grad_out, const std::vector<std::int32_t>& argmax,
                        ScalarMap& grad_in) {
  for (size_t i = 0; i < grad_out.data.size(); ++i)
    grad_in.data[argmax[i]] += grad_out.data[i];
}

}  // namespace

TotalLoss total_loss(const FreeParams& params, const SceneInputs& inputs, const LossWeights& weights,
                     int levels, KinkSignature* sig) {
  weights.validate();
  params.validate(inputs.sources.size());
  inputs.K.validate();
  if (inputs.sources.empty()) throw validation_error("total_loss: at least one source view required");
  if (levels < 1) throw validation_error("total_loss: at least one pyramid level required");
  const int w = params.log_depth.width, h = params.log_depth.height;
  if (inputs.target.width != w || inputs.target.height != h)
    throw validation_error("total_loss: target image / parameter dimension mismatch");
  for (const ImageF& s : inputs.sources)
    if (s.width != w || s.height != h || s.channels != inputs.target.channels)
      throw validation_error("total_loss: source image dimension mismatch");
  if ((w >> (levels - 1)) < 3 || (h >> (levels - 1)) < 3)
    throw validation_error("total_loss: coarsest level falls below 3x3; reduce levels");

  const size_t n_src = inputs.sources.size();

  // Forward pyramids.
  std::vector<LevelData> lv(levels);
  lv[0].depth = exp_map(params.log_depth);
  lv[0].edges = sigmoid_map(params.edge_logits);
  lv[0].target = inputs.target;
  lv[0].sources = inputs.sources;
  lv[0].K = inputs.K;
  for (int l = 1; l < levels; ++l) {
    lv[l].depth = downsample(lv[l - 1].depth);
    lv[l].edges = downsample_edges_max(lv[l - 1].edges, lv[l].edge_argmax);
    lv[l].target = downsample(lv[l - 1].target);
    for (const ImageF& s : lv[l - 1].sources) lv[l].sources.push_back(downsample(s));
    lv[l].K = lv[l - 1].K.half();
    if (sig) {
      const size_t off = sig->add_block(lv[l].edge_argmax.size());
      for (size_t i = 0; i < lv[l].edge_argmax.size(); ++i) sig->set(off + i, lv[l].edge_argmax[i]);
    }
  }

  TotalLoss out;
  out.grad_twists.assign(n_src * 6, 0.0);

  std::vector<ScalarMap> grad_depth_l(levels), grad_edge_l(levels);

  for (int l = 0; l < levels; ++l) {
    const LevelData& L = lv[l];
    const int lw = L.depth.width, lh = L.depth.height;
    grad_depth_l[l] = ScalarMap(lw, lh);
    grad_edge_l[l] = ScalarMap(lw, lh);

    const NeighborhoodWeights nb;  // uniform
    DepthToNormal d2n;
    const bool need_normals = weights.lambda_n != 0.0 || weights.consistency;
    if (need_normals) {
      d2n = depth_to_normal(L.depth, L.K, nb);
      if (sig && d2n.tie_count() > 0) sig->hard_exclude = true;
    }
    Vec3Map grad_normals(lw, lh);

    // Photometric term, optionally on the consistency-refined depth.
    if (weights.lambda_vs != 0.0) {
      std::vector<SourceView> views(n_src);
      for (size_t s = 0; s < n_src; ++s) {
        views[s].image = &L.sources[s];
        views[s].twist = Eigen::Map<const Vec6>(params.twists.data() + 6 * s);
      }

      NormalToDepth n2d;
      const DepthMap* depth_for_vs = &L.depth;
      if (weights.consistency) {
        n2d = normal_to_depth(L.depth, d2n.normals, L.K, nb);
        depth_for_vs = &n2d.refined;
        if (sig) {
          const size_t off = sig->add_block(n2d.flagged.size());
          for (size_t i = 0; i < n2d.flagged.size(); ++i)
            sig->set(off + i, n2d.flagged[i]);
        }
      }

      const PhotometricLoss vs = photometric_loss(L.target, views, *depth_for_vs, L.K, sig);
      out.l_vs += vs.value;
      for (size_t s = 0; s < n_src; ++s)
        for (int k = 0; k < 6; ++k) out.grad_twists[6 * s + k] += weights.lambda_vs * vs.grad_twist[s][k];

      // photometric_loss reports d/dlog(D); convert to d/dD of its input.
      ScalarMap grad_vs_depth(lw, lh);
      for (size_t i = 0; i < grad_vs_depth.data.size(); ++i)
        grad_vs_depth.data[i] = weights.lambda_vs * vs.grad_logdepth.data[i] / depth_for_vs->data[i];

      if (weights.consistency) {
        normal_to_depth_vjp(L.depth, d2n.normals, L.K, nb, n2d, grad_vs_depth, grad_depth_l[l],
                            grad_normals);
      } else {
        for (size_t i = 0; i < grad_vs_depth.data.size(); ++i)
          grad_depth_l[l].data[i] += grad_vs_depth.data[i];
      }
    }

    if (weights.lambda_d != 0.0) {
      const LossGrad ld = loss_depth_asap(L.depth, L.edges, L.K, weights.clip, sig);
      out.l_d += ld.value;
      for (size_t i = 0; i < grad_depth_l[l].data.size(); ++i)
        grad_depth_l[l].data[i] += weights.lambda_d * ld.grad_depth.data[i];
      for (size_t i = 0; i < grad_edge_l[l].data.size(); ++i)
        grad_edge_l[l].data[i] += weights.lambda_d * ld.grad_edge.data[i];
    }

    // The normal smoothness and the edge regularizer act on the finest
    // scale only, matching the total loss as written (N_t, E_t).
    if (weights.lambda_n != 0.0 && l == 0) {
      const LossGrad ln = loss_normal_asap(d2n.normals, L.edges, sig);
      out.l_n += ln.value;
      for (size_t i = 0; i < grad_normals.data.size(); ++i)
        grad_normals.data[i] += weights.lambda_n * ln.grad_normals.data[i];
      for (size_t i = 0; i < grad_edge_l[l].data.size(); ++i)
        grad_edge_l[l].data[i] += weights.lambda_n * ln.grad_edge.data[i];
    }

    if (need_normals) {
      bool any = false;
      for (double g : grad_normals.data)
        if (g != 0.0) {
          any = true;
          break;
        }
      if (any) depth_to_normal_vjp(L.depth, L.K, nb, d2n, grad_normals, grad_depth_l[l]);
    }

    if (weights.lambda_e != 0.0 && l == 0) {
      const LossGrad le = loss_edge_reg(L.edges);
      out.l_e += le.value;
      for (size_t i = 0; i < grad_edge_l[l].data.size(); ++i)
        grad_edge_l[l].data[i] += weights.lambda_e * le.grad_edge.data[i];
    }
  }

  // Pull per-level gradients back to level 0: box adjoint for depth,
  // max-pool adjoint for the edge maps.
  ScalarMap acc_d = grad_depth_l[levels - 1];
  ScalarMap acc_e = grad_edge_l[levels - 1];
  for (int l = levels - 2; l >= 0; --l) {
    downsample_adjoint_accum(acc_d, grad_depth_l[l]);
    pool_adjoint_accum(acc_e, lv[l + 1].edge_argmax, grad_edge_l[l]);
    acc_d = std::move(grad_depth_l[l]);
    acc_e = std::move(grad_edge_l[l]);
  }

  out.grad_logdepth = to_logdepth_grad(acc_d, lv[0].depth);
  out.grad_logits = to_logit_grad(acc_e, lv[0].edges);
  out.value = weights.lambda_vs * out.l_vs + weights.lambda_d * out.l_d +
              weights.lambda_n * out.l_n + weights.lambda_e * out.l_e;
  return out;
}

OptimizeTrace optimize(const FreeParams& initial, const SceneInputs& inputs,
                       const LossWeights& weights, const OptimizerConfig& config) {
  config.validate();
  weights.validate();
  initial.validate(inputs.sources.size());

  OptimizeTrace trace;
  trace.final_params = initial;
  FreeParams& p = trace.final_params;

  struct Moments {
    std::vector<double> m, v;
  };
  auto make_moments = [](size_t n) {
    Moments mo;
    mo.m.assign(n, 0.0);
    mo.v.assign(n, 0.0);
    return mo;
  };
  Moments mo_d = make_moments(p.log_depth.data.size());
  Moments mo_e = make_moments(p.edge_logits.data.size());
  Moments mo_t = make_moments(p.twists.size());

  auto adam_step = [&](std::vector<double>& x, const std::vector<double>& g, Moments& mo, int t,
                       double step) {
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    for (size_t i = 0; i < x.size(); ++i) {
      mo.m[i] = config.beta1 * mo.m[i] + (1.0 - config.beta1) * g[i];
      mo.v[i] = config.beta2 * mo.v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = mo.m[i] / bc1;
      const double vhat = mo.v[i] / bc2;
      x[i] -= step * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  };

  std::vector<double> history;
  history.reserve(config.iterations);

  for (int it = 1; it <= config.iterations; ++it) {
    const TotalLoss t = total_loss(p, inputs, weights, config.levels);
    if (!std::isfinite(t.value)) {
      std::string bad = "total";
      if (!std::isfinite(t.l_vs)) bad = "photometric";
      else if (!std::isfinite(t.l_d)) bad = "depth smoothness";
      else if (!std::isfinite(t.l_n)) bad = "normal smoothness";
      else if (!std::isfinite(t.l_e)) bad = "edge regularizer";
      throw validation_error("optimize: non-finite loss at iteration " + std::to_string(it) +
                             " (offending term: " + bad + ")");
    }
    trace.rows.push_back({it, t.value, t.l_vs, t.l_d, t.l_n, t.l_e});
    history.push_back(t.value);

    adam_step(p.log_depth.data, t.grad_logdepth.data, mo_d, it, config.step);
    adam_step(p.edge_logits.data, t.grad_logits.data, mo_e, it,
              config.step * config.edge_step_scale);
    if (config.optimize_pose) adam_step(p.twists, t.grad_twists, mo_t, it, config.step);

    const double lo = std::log(config.min_depth), hi = std::log(config.max_depth);
    for (double& v : p.log_depth.data) v = std::clamp(v, lo, hi);

    if (config.tolerance > 0 && it > 50) {
      const double prev = history[it - 51];
      if (std::abs(history[it - 1] - prev) < config.tolerance * std::max(std::abs(prev), 1e-12))
        break;
    }
  }
  return trace;
}

bool GradCheckReport::pass(double tol) const {
  for (const GradCheckBlock& b : blocks)
    if (b.worst_rel > tol) return false;
  return true;
}

GradCheckReport gradcheck(const std::function<double(KinkSignature*)>& eval,
                          const std::vector<FdBlock>& blocks, double default_h,
                          std::size_t samples_per_block, std::uint64_t seed) {
  if (!(default_h > 0)) throw validation_error("gradcheck: step must be positive");
  std::mt19937_64 rng(seed);
  GradCheckReport report;

  for (const FdBlock& blk : blocks) {
    const double h = blk.h > 0 ? blk.h : default_h;
    GradCheckBlock rb;
    rb.name = blk.name;
    std::vector<double>& x = *blk.values;
    const std::vector<double>& g = *blk.analytic;

    std::vector<size_t> order(x.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (x.size() > samples_per_block) {
      for (size_t i = 0; i < samples_per_block; ++i) {
        std::uniform_int_distribution<size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
      }
      order.resize(samples_per_block);
    }

    for (size_t idx : order) {
      const double saved = x[idx];
      // Central differences at h and h/2. The secants are trusted only when
      // every probe point shares one kink signature (no subgradient point
      // inside the stencil) and the two estimates agree (not truncation
      // dominated, e.g. near a steep slope-quotient pole); the comparison
      // then uses the Richardson extrapolation of the two.
      KinkSignature sp, sm, sp2, sm2;
      x[idx] = saved + h;
      const double fp = eval(&sp);
      x[idx] = saved - h;
      const double fm = eval(&sm);
      x[idx] = saved + 0.5 * h;
      const double fp2 = eval(&sp2);
      x[idx] = saved - 0.5 * h;
      const double fm2 = eval(&sm2);
      x[idx] = saved;

      if (!KinkSignature::comparable(sp, sm) || !KinkSignature::comparable(sp2, sm2) ||
          !KinkSignature::comparable(sp, sp2)) {
        rb.excluded += 1;
        continue;
      }
      const double fd_h = (fp - fm) / (2.0 * h);
      const double fd_h2 = (fp2 - fm2) / h;
      const double fd_scale = std::max(std::max(std::abs(fd_h), std::abs(fd_h2)), 1e-6);
      if (std::abs(fd_h - fd_h2) > 1e-3 * fd_scale) {
        rb.excluded += 1;
        continue;
      }
      const double fd = (4.0 * fd_h2 - fd_h) / 3.0;
      const double a = g[idx];
      const double denom = std::max(std::max(std::abs(a), std::abs(fd)), 1e-6);
      const double rel = std::abs(a - fd) / denom;
      rb.checked += 1;
      if (rel > rb.worst_rel) {
        rb.worst_rel = rel;
        rb.worst_index = idx;
        rb.worst_analytic = a;
        rb.worst_fd = fd;
      }
    }
    report.blocks.push_back(rb);
  }
  return report;
}

GradCheckReport gradcheck_total(FreeParams& params, const SceneInputs& inputs,
                                const LossWeights& weights, int levels, double h,
                                std::size_t samples_per_block, std::uint64_t seed) {
  const TotalLoss base = total_loss(params, inputs, weights, levels);

  std::vector<FdBlock> blocks;
  blocks.push_back({"log_depth", &params.log_depth.data, &base.grad_logdepth.data});
  blocks.push_back({"edge_logits", &params.edge_logits.data, &base.grad_logits.data});
  blocks.push_back({"twists", &params.twists, &base.grad_twists, 1e-6});

  auto eval = [&](KinkSignature* sig) { return total_loss(params, inputs, weights, levels, sig).value; };
  return gradcheck(eval, blocks, h, samples_per_block, seed);
}

}  // namespace edgegeo
