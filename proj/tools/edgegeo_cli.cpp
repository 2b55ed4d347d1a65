// Command-line front end: scene rendering, direct optimization runs,
// metric evaluation, edge ground-truth generation, and gradient checking.
//
// Exit codes: 0 success, 1 validation/configuration error, 2 I/O error.
// Precedence for settings: defaults < command-line flags < JSON config.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "edgegeo/edge_gt.hpp"
#include "edgegeo/image_io.hpp"
#include "edgegeo/metrics.hpp"
#include "edgegeo/optimizer.hpp"
#include "edgegeo/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgegeo;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what(), static_cast<std::int64_t>(e.byte));
  }
}

// Written atomically (temp file + rename) once the run has finished.
struct RunManifest {
  json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void write(const std::string& outdir, double wall_clock_sec) const {
    json j;
    j["config"] = config;
    j["config_hash"] = hex64(fnv1a64(config.dump()));
    j["seed"] = seed;
    j["version"] = kVersion;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_clock_sec"] = wall_clock_sec;
    const fs::path final_path = fs::path(outdir) / "run_manifest.json";
    const fs::path tmp_path = fs::path(outdir) / ".run_manifest.json.tmp";
    {
      std::ofstream f(tmp_path);
      if (!f) throw io_error("cannot write " + tmp_path.string());
      f << j.dump(2) << "\n";
    }
    fs::rename(tmp_path, final_path);
  }
};

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

LossWeights weights_from_json(LossWeights w, const json& j) {
  w.lambda_vs = j.value("lambda_vs", w.lambda_vs);
  w.lambda_d = j.value("lambda_d", w.lambda_d);
  w.lambda_n = j.value("lambda_n", w.lambda_n);
  w.lambda_e = j.value("lambda_e", w.lambda_e);
  w.consistency = j.value("consistency", w.consistency);
  w.clip = j.value("clip", w.clip);
  return w;
}

OptimizerConfig optimizer_from_json(OptimizerConfig c, const json& j) {
  c.step = j.value("step", c.step);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.iterations = j.value("iterations", c.iterations);
  c.levels = j.value("levels", c.levels);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.seed = j.value("seed", c.seed);
  c.optimize_pose = j.value("optimize_pose", c.optimize_pose);
  return c;
}

json weights_to_json(const LossWeights& w) {
  return json{{"lambda_vs", w.lambda_vs}, {"lambda_d", w.lambda_d}, {"lambda_n", w.lambda_n},
              {"lambda_e", w.lambda_e},   {"consistency", w.consistency}, {"clip", w.clip}};
}

json optimizer_to_json(const OptimizerConfig& c) {
  return json{{"step", c.step},           {"beta1", c.beta1},
              {"beta2", c.beta2},         {"epsilon", c.epsilon},
              {"iterations", c.iterations}, {"levels", c.levels},
              {"tolerance", c.tolerance}, {"seed", c.seed},
              {"optimize_pose", c.optimize_pose}};
}

std::vector<std::string> list_files(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw io_error(dir + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext)
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw validation_error("no " + ext + " files in " + dir);
  return names;
}

// ---------------------------------------------------------------- scene ---

struct SceneArgs {
  std::string scene = "plane";
  std::string outdir;
  std::uint64_t seed = 0;
};

int cmd_scene(const SceneArgs& a) {
  Stopwatch clock;
  PlanarScene scene;
  std::vector<std::string> inputs;
  const auto catalog = standard_scenes();
  if (catalog.count(a.scene)) {
    scene = catalog.at(a.scene);
    inputs.push_back("catalog:" + a.scene);
  } else {
    scene = scene_from_json_file(a.scene);
    inputs.push_back(a.scene);
  }
  // reseed textures deterministically when a nonzero seed is given
  if (a.seed != 0)
    for (size_t i = 0; i < scene.planes.size(); ++i)
      scene.planes[i].texture.seed = static_cast<std::uint32_t>(a.seed * 2654435761u + i);
  scene.validate();

  std::vector<RenderedView> views;
  for (size_t i = 0; i < scene.trajectory.size(); ++i) views.push_back(render(scene, static_cast<int>(i)));

  fs::create_directories(a.outdir);
  write_bundle(a.outdir, scene, views);
  scene_to_json_file(scene, a.outdir + "/scene.json");

  RunManifest manifest;
  manifest.config = json{{"command", "scene"}, {"scene", a.scene}, {"seed", a.seed}};
  manifest.seed = a.seed;
  manifest.inputs = inputs;
  manifest.outputs = {"manifest.json", "scene.json"};
  for (size_t i = 0; i < views.size(); ++i) {
    char base[32];
    std::snprintf(base, sizeof base, "view_%03zu", i);
    for (const char* suffix : {".ppm", "_depth.pfm", "_normal.pfm", "_edge.pgm"})
      manifest.outputs.push_back(std::string(base) + suffix);
  }
  manifest.write(a.outdir, clock.seconds());
  std::cout << "rendered " << views.size() << " views of '" << scene.name << "' to " << a.outdir
            << "\n";
  return 0;
}

// ------------------------------------------------------------- optimize ---

struct OptimizeArgs {
  std::string bundle;
  std::string outdir;
  std::string weights_json;
  std::string optimizer_json;
  std::string init_depth;
  int target = -1;  // default: middle view
  int levels = 4;
  std::uint64_t seed = 0;
  LossWeights weights;  // flag-adjustable
  OptimizerConfig config;
  bool no_pose_opt = false;
};

struct LoadedProblem {
  SceneInputs inputs;
  FreeParams params;
  DepthMap target_gt_depth;
  int target_index = 0;
  std::vector<int> source_indices;
};

LoadedProblem load_problem(const std::string& bundle_dir, int target, const std::string& init_depth,
                           std::uint64_t seed) {
  const SceneBundle bundle = read_bundle(bundle_dir);
  const int n = static_cast<int>(bundle.views.size());
  if (n < 2) throw validation_error("optimization needs at least two views in the bundle");
  const int ti = target < 0 ? n / 2 : target;
  if (ti < 0 || ti >= n) throw validation_error("target view index out of range");

  LoadedProblem p;
  p.target_index = ti;
  p.inputs.K = bundle.K;
  p.inputs.target = bundle.views[ti].image;
  const PoseSE3 target_pose = PoseSE3::exp(Eigen::Map<const Vec6>(bundle.views[ti].pose.data()));
  for (int s = 0; s < n; ++s) {
    if (s == ti) continue;
    p.source_indices.push_back(s);
    p.inputs.sources.push_back(bundle.views[s].image);
    const PoseSE3 source_pose = PoseSE3::exp(Eigen::Map<const Vec6>(bundle.views[s].pose.data()));
    const Vec6 rel = (source_pose.inverse() * target_pose).log();
    for (int k = 0; k < 6; ++k) p.params.twists.push_back(rel[k]);
  }

  p.target_gt_depth = bundle.views[ti].depth_gt;
  p.target_gt_depth.validate();

  const int w = bundle.width, h = bundle.height;
  p.params.log_depth = ScalarMap(w, h);
  if (!init_depth.empty()) {
    const ScalarMap init = read_pfm_scalar(init_depth);
    if (init.width != w || init.height != h)
      throw validation_error("--init-depth dimensions do not match the bundle");
    for (size_t i = 0; i < init.data.size(); ++i) {
      if (!(init.data[i] > 0.0)) throw validation_error("--init-depth must be strictly positive");
      p.params.log_depth.data[i] = std::log(init.data[i]);
    }
  } else {
    std::vector<double> sorted = p.target_gt_depth.data;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (double& v : p.params.log_depth.data) v = std::log(median) + noise(rng);
  }
  p.params.edge_logits = ScalarMap(w, h, -4.0);
  return p;
}

void write_trace_csv(const std::string& path, const OptimizeTrace& trace) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot write " + path);
  f << "iteration,total,l_vs,l_d,l_n,l_e\n";
  char line[256];
  for (const auto& r : trace.rows) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.total,
                  r.l_vs, r.l_d, r.l_n, r.l_e);
    f << line;
  }
}

int cmd_optimize(const OptimizeArgs& a) {
  Stopwatch clock;
  LossWeights weights = a.weights;
  OptimizerConfig config = a.config;
  config.levels = a.levels;
  config.seed = a.seed;
  if (a.no_pose_opt) config.optimize_pose = false;
  if (!a.weights_json.empty()) weights = weights_from_json(weights, parse_json_file(a.weights_json));
  if (!a.optimizer_json.empty())
    config = optimizer_from_json(config, parse_json_file(a.optimizer_json));
  weights.validate();
  config.validate();

  const LoadedProblem p = load_problem(a.bundle, a.target, a.init_depth, config.seed);
  const OptimizeTrace trace = optimize(p.params, p.inputs, weights, config);

  fs::create_directories(a.outdir);
  write_trace_csv(a.outdir + "/trace.csv", trace);

  const DepthMap final_depth = exp_map(trace.final_params.log_depth);
  const EdgeMap final_edges = sigmoid_map(trace.final_params.edge_logits);
  const NormalMap final_normals = depth_to_normal(final_depth, p.inputs.K).normals;
  write_pfm(a.outdir + "/depth.pfm", final_depth);
  write_pfm(a.outdir + "/normal.pfm", final_normals);
  write_pfm(a.outdir + "/edge.pfm", final_edges);
  {
    json tw = json::array();
    for (size_t s = 0; s < p.source_indices.size(); ++s) {
      json t = json::array();
      for (int k = 0; k < 6; ++k) t.push_back(trace.final_params.twists[6 * s + k]);
      tw.push_back(json{{"source_view", p.source_indices[s]}, {"twist", t}});
    }
    std::ofstream f(a.outdir + "/poses.json");
    f << json{{"target_view", p.target_index}, {"sources", tw}}.dump(2) << "\n";
  }

  RunManifest manifest;
  manifest.config = json{{"command", "optimize"},
                         {"weights", weights_to_json(weights)},
                         {"optimizer", optimizer_to_json(config)},
                         {"target", p.target_index}};
  manifest.seed = config.seed;
  manifest.inputs = {a.bundle + "/manifest.json"};
  if (!a.init_depth.empty()) manifest.inputs.push_back(a.init_depth);
  manifest.outputs = {"trace.csv", "depth.pfm", "normal.pfm", "edge.pfm", "poses.json"};
  manifest.write(a.outdir, clock.seconds());

  std::cout << "optimized " << trace.rows.size() << " iterations; final loss "
            << trace.rows.back().total << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ---

struct EvalDepthArgs {
  std::string pred_dir, gt_dir, out_csv;
  double cap = 0.0;  // 0 disables
  bool median_align = false;
};

int cmd_eval_depth(const EvalDepthArgs& a) {
  const auto names = list_files(a.pred_dir, ".pfm");
  std::vector<std::pair<std::string, DepthMetrics>> rows;
  for (const std::string& name : names) {
    const ScalarMap pred = read_pfm_scalar(a.pred_dir + "/" + name);
    const ScalarMap gt = read_pfm_scalar(a.gt_dir + "/" + name);
    BinaryMap mask(gt.width, gt.height);
    for (size_t i = 0; i < gt.data.size(); ++i)
      mask.data[i] = std::isfinite(gt.data[i]) && gt.data[i] > 0.0;
    rows.emplace_back(name, eval_depth(pred, gt, mask,
                                       a.cap > 0 ? std::optional<double>(a.cap) : std::nullopt,
                                       a.median_align));
  }

  std::ofstream f(a.out_csv);
  if (!f) throw io_error("cannot write " + a.out_csv);
  f << "image,abs_rel,sq_rel,rmse,rmse_log\n";
  DepthMetrics agg;
  char line[256];
  for (const auto& [name, m] : rows) {
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g\n", name.c_str(), m.abs_rel,
                  m.sq_rel, m.rmse, m.rmse_log);
    f << line;
    agg.abs_rel += m.abs_rel;
    agg.sq_rel += m.sq_rel;
    agg.rmse += m.rmse;
    agg.rmse_log += m.rmse_log;
  }
  const double n = static_cast<double>(rows.size());
  std::snprintf(line, sizeof line, "aggregate,%.17g,%.17g,%.17g,%.17g\n", agg.abs_rel / n,
                agg.sq_rel / n, agg.rmse / n, agg.rmse_log / n);
  f << line;
  std::cout << "abs_rel " << agg.abs_rel / n << " over " << rows.size() << " images\n";
  return 0;
}

struct EvalNormalArgs {
  std::string pred_dir, gt_dir, out_csv;
};

int cmd_eval_normal(const EvalNormalArgs& a) {
  const auto names = list_files(a.pred_dir, ".pfm");
  std::vector<std::pair<std::string, NormalMetrics>> rows;
  for (const std::string& name : names) {
    const NormalMap pred = read_pfm_normal(a.pred_dir + "/" + name);
    const NormalMap gt = read_pfm_normal(a.gt_dir + "/" + name);
    BinaryMap mask(gt.width, gt.height);
    for (int y = 0; y < gt.height; ++y)
      for (int x = 0; x < gt.width; ++x)
        mask.at(x, y) = std::abs(gt.at(x, y).norm() - 1.0) <= 1e-3;
    rows.emplace_back(name, eval_normal(pred, gt, mask));
  }

  std::ofstream f(a.out_csv);
  if (!f) throw io_error("cannot write " + a.out_csv);
  f << "image,mean_deg,median_deg,frac_under_11_25,frac_under_22_5,frac_under_30\n";
  NormalMetrics agg;
  char line[320];
  for (const auto& [name, m] : rows) {
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", name.c_str(), m.mean_deg,
                  m.median_deg, m.frac_under_11_25, m.frac_under_22_5, m.frac_under_30);
    f << line;
    agg.mean_deg += m.mean_deg;
    agg.median_deg += m.median_deg;
    agg.frac_under_11_25 += m.frac_under_11_25;
    agg.frac_under_22_5 += m.frac_under_22_5;
    agg.frac_under_30 += m.frac_under_30;
  }
  const double n = static_cast<double>(rows.size());
  std::snprintf(line, sizeof line, "aggregate,%.17g,%.17g,%.17g,%.17g,%.17g\n", agg.mean_deg / n,
                agg.median_deg / n, agg.frac_under_11_25 / n, agg.frac_under_22_5 / n,
                agg.frac_under_30 / n);
  f << line;
  std::cout << "mean angular error " << agg.mean_deg / n << " deg over " << rows.size()
            << " images\n";
  return 0;
}

struct EvalEdgeArgs {
  std::string pred_dir, gt_dir, out_csv, pr_csv;
  double match_radius = 0.0075;
};

int cmd_eval_edge(const EvalEdgeArgs& a) {
  const auto names = list_files(a.pred_dir, ".pfm");
  std::vector<EdgeMap> preds;
  std::vector<BinaryMap> gts;
  for (const std::string& name : names) {
    EdgeMap e;
    static_cast<ScalarMap&>(e) = read_pfm_scalar(a.pred_dir + "/" + name);
    preds.push_back(std::move(e));
    const std::string stem = fs::path(name).stem().string();
    gts.push_back(read_pgm8_binary(a.gt_dir + "/" + stem + ".pgm"));
  }
  std::vector<EdgeSample> samples;
  for (size_t i = 0; i < preds.size(); ++i) samples.push_back({&preds[i], &gts[i]});

  EdgeEvalOptions opts;
  opts.match_radius_frac = a.match_radius;
  const EdgeMetrics m = eval_edge(samples, opts);

  std::ofstream f(a.out_csv);
  if (!f) throw io_error("cannot write " + a.out_csv);
  f << "image,ods_f1,ois_f1,ap\n";
  char line[256];
  for (size_t i = 0; i < names.size(); ++i) {
    const EdgeMetrics single = eval_edge(preds[i], gts[i], opts);
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g\n", names[i].c_str(), single.ods_f1,
                  single.ois_f1, single.ap);
    f << line;
  }
  std::snprintf(line, sizeof line, "aggregate,%.17g,%.17g,%.17g\n", m.ods_f1, m.ois_f1, m.ap);
  f << line;

  std::ofstream pf(a.pr_csv);
  if (!pf) throw io_error("cannot write " + a.pr_csv);
  pf << "threshold,precision,recall\n";
  for (const PrPoint& p : m.pr_curve) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.threshold, p.precision, p.recall);
    pf << line;
  }
  std::cout << "ODS " << m.ods_f1 << " OIS " << m.ois_f1 << " AP " << m.ap << "\n";
  return 0;
}

// -------------------------------------------------------------- edge-gt ---

struct EdgeGtArgs {
  std::string labels, instances, merge_csv, out;
};

int cmd_edge_gt(const EdgeGtArgs& a) {
  int w = 0, h = 0;
  LabelMap labels;
  labels.categories = read_pgm16(a.labels, w, h);
  labels.width = w;
  labels.height = h;
  if (!a.instances.empty()) {
    int iw = 0, ih = 0;
    labels.instances = read_pgm16(a.instances, iw, ih);
    if (iw != w || ih != h) throw validation_error("instance map dimensions differ from labels");
  }
  const MergeTable table = merge_table_from_csv(a.merge_csv);
  const BinaryMap edges = extract_edges(merge_labels(labels, table));
  write_pgm8_binary(a.out, edges);
  std::cout << "wrote " << edges.count() << " edge pixels to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------ gradcheck ---

struct GradcheckArgs {
  std::string bundle;
  std::string weights_json;
  int levels = 2;
  std::uint64_t seed = 0;
  std::size_t samples = 200;
  double h = 1e-4;
  double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  LossWeights weights;
  if (!a.weights_json.empty()) weights = weights_from_json(weights, parse_json_file(a.weights_json));
  weights.validate();

  LoadedProblem p = load_problem(a.bundle, -1, "", a.seed);
  // start near the rendered depth with seeded noise so every term is active
  std::mt19937_64 rng(a.seed + 1);
  std::normal_distribution<double> dnoise(0.0, 0.05);
  std::normal_distribution<double> enoise(-1.0, 0.8);
  for (size_t i = 0; i < p.params.log_depth.data.size(); ++i)
    p.params.log_depth.data[i] = std::log(p.target_gt_depth.data[i]) + dnoise(rng);
  for (double& v : p.params.edge_logits.data) v = enoise(rng);

  const GradCheckReport report =
      gradcheck_total(p.params, p.inputs, weights, a.levels, a.h, a.samples, a.seed);

  bool pass = true;
  for (const GradCheckBlock& b : report.blocks) {
    const bool ok = b.worst_rel <= a.tolerance && b.checked > 0;
    pass = pass && ok;
    std::cout << (ok ? "PASS" : "FAIL") << " " << b.name << ": worst relative error " << b.worst_rel
              << " over " << b.checked << " checked coordinates (" << b.excluded
              << " excluded at kinks)\n";
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable view synthesis, edge-aware geometry losses, and evaluation tools"};
  app.require_subcommand(1);

  SceneArgs scene_args;
  CLI::App* scene_cmd = app.add_subcommand("scene", "render a catalog or custom scene to a bundle");
  scene_cmd->add_option("--scene", scene_args.scene,
                        "catalog name (plane, corridor, box-street) or scene JSON path");
  scene_cmd->add_option("--out", scene_args.outdir, "output bundle directory")->required();
  scene_cmd->add_option("--seed", scene_args.seed, "texture reseed (0 keeps authored seeds)");

  OptimizeArgs opt_args;
  CLI::App* opt_cmd = app.add_subcommand("optimize", "direct per-pixel optimization on a bundle");
  opt_cmd->add_option("--bundle", opt_args.bundle, "scene bundle directory")->required();
  opt_cmd->add_option("--out", opt_args.outdir, "output directory")->required();
  opt_cmd->add_option("--weights", opt_args.weights_json, "loss weights JSON (overrides flags)");
  opt_cmd->add_option("--optimizer", opt_args.optimizer_json, "optimizer JSON (overrides flags)");
  opt_cmd->add_option("--init-depth", opt_args.init_depth, "initial depth PFM");
  opt_cmd->add_option("--target", opt_args.target, "target view index (default: middle view)");
  opt_cmd->add_option("--scale-levels", opt_args.levels, "pyramid levels");
  opt_cmd->add_option("--seed", opt_args.seed, "seed for the initialization noise");
  opt_cmd->add_option("--iterations", opt_args.config.iterations, "iteration budget");
  opt_cmd->add_option("--step", opt_args.config.step, "optimizer step size");
  opt_cmd->add_option("--lambda-vs", opt_args.weights.lambda_vs, "photometric weight");
  opt_cmd->add_option("--lambda-d", opt_args.weights.lambda_d, "depth smoothness weight");
  opt_cmd->add_option("--lambda-n", opt_args.weights.lambda_n, "normal smoothness weight");
  opt_cmd->add_option("--lambda-e", opt_args.weights.lambda_e, "edge regularizer weight");
  opt_cmd->add_flag("--no-clip", [&](std::int64_t) { opt_args.weights.clip = false; },
                    "disable double-edge clipping");
  opt_cmd->add_flag("--no-consistency", [&](std::int64_t) { opt_args.weights.consistency = false; },
                    "skip the normal-to-depth refinement before the photometric term");
  opt_cmd->add_flag("--no-pose-opt", opt_args.no_pose_opt, "freeze the source poses");

  EvalDepthArgs ed_args;
  CLI::App* ed_cmd = app.add_subcommand("eval-depth", "depth metrics over PFM directories");
  ed_cmd->add_option("--pred", ed_args.pred_dir, "prediction directory")->required();
  ed_cmd->add_option("--gt", ed_args.gt_dir, "ground-truth directory")->required();
  ed_cmd->add_option("--out", ed_args.out_csv, "metrics CSV path")->required();
  ed_cmd->add_option("--cap", ed_args.cap, "depth cap in meters (0 disables)");
  ed_cmd->add_flag("--median-align", ed_args.median_align, "median-align each prediction");

  EvalNormalArgs en_args;
  CLI::App* en_cmd = app.add_subcommand("eval-normal", "normal metrics over PFM directories");
  en_cmd->add_option("--pred", en_args.pred_dir, "prediction directory")->required();
  en_cmd->add_option("--gt", en_args.gt_dir, "ground-truth directory")->required();
  en_cmd->add_option("--out", en_args.out_csv, "metrics CSV path")->required();

  EvalEdgeArgs ee_args;
  CLI::App* ee_cmd = app.add_subcommand("eval-edge", "edge metrics (PFM predictions, PGM gt)");
  ee_cmd->add_option("--pred", ee_args.pred_dir, "prediction directory")->required();
  ee_cmd->add_option("--gt", ee_args.gt_dir, "ground-truth directory")->required();
  ee_cmd->add_option("--out", ee_args.out_csv, "metrics CSV path")->required();
  ee_cmd->add_option("--pr", ee_args.pr_csv, "PR-curve CSV path")->required();
  ee_cmd->add_option("--match-radius", ee_args.match_radius,
                     "matching radius as a fraction of the image diagonal");

  EdgeGtArgs eg_args;
  CLI::App* eg_cmd = app.add_subcommand("edge-gt", "geometric edge gt from label maps");
  eg_cmd->add_option("--labels", eg_args.labels, "16-bit PGM category map")->required();
  eg_cmd->add_option("--instances", eg_args.instances, "16-bit PGM instance map");
  eg_cmd->add_option("--merge", eg_args.merge_csv, "merge table CSV")->required();
  eg_cmd->add_option("--out", eg_args.out, "output 8-bit PGM")->required();

  GradcheckArgs gc_args;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the total loss");
  gc_cmd->add_option("--bundle", gc_args.bundle, "scene bundle directory")->required();
  gc_cmd->add_option("--weights", gc_args.weights_json, "loss weights JSON");
  gc_cmd->add_option("--scale-levels", gc_args.levels, "pyramid levels");
  gc_cmd->add_option("--seed", gc_args.seed, "seed");
  gc_cmd->add_option("--samples", gc_args.samples, "coordinates per parameter block");
  gc_cmd->add_option("--fd-step", gc_args.h, "finite-difference step");
  gc_cmd->add_option("--tolerance", gc_args.tolerance, "worst acceptable relative error");

  try {
    app.parse(argc, argv);
    if (scene_cmd->parsed()) return cmd_scene(scene_args);
    if (opt_cmd->parsed()) return cmd_optimize(opt_args);
    if (ed_cmd->parsed()) return cmd_eval_depth(ed_args);
    if (en_cmd->parsed()) return cmd_eval_normal(en_args);
    if (ee_cmd->parsed()) return cmd_eval_edge(ee_args);
    if (eg_cmd->parsed()) return cmd_edge_gt(eg_args);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
