#include "edgegeo/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace edgegeo {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_mask(const BinaryMap& mask, int w, int h) {
  if (mask.width != w || mask.height != h)
    throw validation_error("evaluation mask dimension mismatch");
  if (mask.count() == 0) throw validation_error("evaluation mask has no valid pixels");
}

}  // namespace

DepthMetrics eval_depth(const ScalarMap& pred, const ScalarMap& gt, const BinaryMap& mask,
                        std::optional<double> cap, bool median_align) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw validation_error("eval_depth: dimension mismatch");
  check_mask(mask, pred.width, pred.height);

  std::vector<double> p, g;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    if (!mask.data[i]) continue;
    if (!(gt.data[i] > 0.0) || !(pred.data[i] > 0.0))
      throw validation_error("eval_depth: non-positive depth inside the mask");
    p.push_back(pred.data[i]);
    g.push_back(gt.data[i]);
  }

  if (median_align) {
    const double scale = median_of(g) / median_of(p);
    for (double& v : p) v *= scale;
  }
  if (cap) {
    for (double& v : p) v = std::min(v, *cap);
    for (double& v : g) v = std::min(v, *cap);
  }

  DepthMetrics m;
  double sq_sum = 0.0, log_sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double d = g[i] - p[i];
    m.abs_rel += std::abs(d) / g[i];
    m.sq_rel += d * d / g[i];
    sq_sum += d * d;
    const double dl = std::log(g[i]) - std::log(p[i]);
    log_sum += dl * dl;
  }
  const double n = static_cast<double>(p.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(sq_sum / n);
  m.rmse_log = std::sqrt(log_sum / n);
  return m;
}

NormalMetrics eval_normal(const NormalMap& pred, const NormalMap& gt, const BinaryMap& mask) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw validation_error("eval_normal: dimension mismatch");
  check_mask(mask, pred.width, pred.height);

  std::vector<double> angles;
  for (int y = 0; y < pred.height; ++y) {
    for (int x = 0; x < pred.width; ++x) {
      if (!mask.at(x, y)) continue;
      const Vec3 a = pred.at(x, y), b = gt.at(x, y);
      if (std::abs(a.norm() - 1.0) > 1e-3 || std::abs(b.norm() - 1.0) > 1e-3)
        throw validation_error("eval_normal: non-unit normal inside the mask");
      const double dot = std::clamp(a.dot(b), -1.0, 1.0);
      angles.push_back(std::acos(dot) * 180.0 / M_PI);
    }
  }

  NormalMetrics m;
  double sum = 0.0;
  size_t u1 = 0, u2 = 0, u3 = 0;
  for (double a : angles) {
    sum += a;
    u1 += a < 11.25;
    u2 += a < 22.5;
    u3 += a < 30.0;
  }
  const double n = static_cast<double>(angles.size());
  m.mean_deg = sum / n;
  m.median_deg = median_of(angles);
  m.frac_under_11_25 = u1 / n;
  m.frac_under_22_5 = u2 / n;
  m.frac_under_30 = u3 / n;
  return m;
}

BinaryMap thin(const BinaryMap& m) {
  const int w = m.width, h = m.height;
  BinaryMap cur = m;
  auto px = [&](const BinaryMap& b, int x, int y) -> int {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0 : (b.at(x, y) ? 1 : 0);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::pair<int, int>> kill;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!cur.at(x, y)) continue;
          // neighbors in circular order N, NE, E, SE, S, SW, W, NW
          const int p[8] = {px(cur, x, y - 1),     px(cur, x + 1, y - 1), px(cur, x + 1, y),
                            px(cur, x + 1, y + 1), px(cur, x, y + 1),     px(cur, x - 1, y + 1),
                            px(cur, x - 1, y),     px(cur, x - 1, y - 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          const bool ok = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                    : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
          if (ok) kill.emplace_back(x, y);
        }
      }
      for (auto [x, y] : kill) cur.at(x, y) = 0;
      changed = changed || !kill.empty();
    }
  }
  return cur;
}

MatchCounts match_edges(const BinaryMap& pred, const BinaryMap& gt, double radius_px) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw validation_error("match_edges: dimension mismatch");
  const int w = pred.width, h = pred.height;

  MatchCounts c;
  c.total_pred = pred.count();
  c.total_gt = gt.count();

  struct Cand {
    double dist;
    int pi, gi;
  };
  std::vector<Cand> cands;
  const int win = static_cast<int>(std::ceil(radius_px));
  const double r2 = radius_px * radius_px + 1e-12;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!pred.at(x, y)) continue;
      const int pi = y * w + x;
      for (int dy = -win; dy <= win; ++dy) {
        for (int dx = -win; dx <= win; ++dx) {
          const int gx = x + dx, gy = y + dy;
          if (gx < 0 || gy < 0 || gx >= w || gy >= h || !gt.at(gx, gy)) continue;
          const double d2 = double(dx) * dx + double(dy) * dy;
          if (d2 <= r2) cands.push_back({std::sqrt(d2), pi, gy * w + gx});
        }
      }
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.pi != b.pi) return a.pi < b.pi;
    return a.gi < b.gi;
  });

  std::vector<std::uint8_t> pred_used(static_cast<size_t>(w) * h, 0), gt_used(static_cast<size_t>(w) * h, 0);
  for (const Cand& cd : cands) {
    if (pred_used[cd.pi] || gt_used[cd.gi]) continue;
    pred_used[cd.pi] = 1;
    gt_used[cd.gi] = 1;
    c.matched += 1;
  }
  return c;
}

namespace {

double f1(double p, double r) { return (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0; }

double precision_of(std::size_t matched, std::size_t total_pred) {
  return total_pred == 0 ? 1.0 : static_cast<double>(matched) / total_pred;
}

}  // namespace

EdgeMetrics eval_edge(const std::vector<EdgeSample>& samples, const EdgeEvalOptions& opts) {
  if (samples.empty()) throw validation_error("eval_edge: no samples");
  const int nt = opts.num_thresholds;
  if (nt < 2) throw validation_error("eval_edge: need at least two thresholds");

  std::vector<double> thresholds(nt);
  for (int k = 0; k < nt; ++k) thresholds[k] = 0.01 + k * (0.98 / (nt - 1));

  std::vector<std::size_t> agg_matched(nt, 0), agg_pred(nt, 0), agg_gt(nt, 0);
  double ois_sum = 0.0;
  std::size_t used_images = 0;

  for (const EdgeSample& s : samples) {
    if (!s.pred || !s.gt) throw validation_error("eval_edge: null sample");
    if (s.pred->width != s.gt->width || s.pred->height != s.gt->height)
      throw validation_error("eval_edge: prediction / gt dimension mismatch");
    if (s.gt->count() == 0) continue;  // undefined recall: skipped entirely
    used_images += 1;

    const double diag = std::hypot(s.pred->width, s.pred->height);
    const double radius = opts.match_radius_frac * diag;

    double best_f1 = 0.0;
    for (int k = 0; k < nt; ++k) {
      BinaryMap bin(s.pred->width, s.pred->height);
      for (size_t i = 0; i < bin.data.size(); ++i) bin.data[i] = s.pred->data[i] >= thresholds[k];
      const BinaryMap thinned = thin(bin);
      const MatchCounts mc = match_edges(thinned, *s.gt, radius);
      agg_matched[k] += mc.matched;
      agg_pred[k] += mc.total_pred;
      agg_gt[k] += mc.total_gt;
      best_f1 = std::max(
          best_f1, f1(precision_of(mc.matched, mc.total_pred),
                      static_cast<double>(mc.matched) / static_cast<double>(mc.total_gt)));
    }
    ois_sum += best_f1;
  }

  if (used_images == 0) throw validation_error("eval_edge: every sample had empty ground truth");

  EdgeMetrics m;
  m.ois_f1 = ois_sum / used_images;
  for (int k = 0; k < nt; ++k) {
    const double p = precision_of(agg_matched[k], agg_pred[k]);
    const double r = static_cast<double>(agg_matched[k]) / static_cast<double>(agg_gt[k]);
    m.pr_curve.push_back({thresholds[k], p, r});
    m.ods_f1 = std::max(m.ods_f1, f1(p, r));
  }

  // AP on the monotone precision envelope, extended left to recall 0.
  std::vector<std::pair<double, double>> pts;  // (recall, precision)
  for (const PrPoint& pp : m.pr_curve) pts.emplace_back(pp.recall, pp.precision);
  std::sort(pts.begin(), pts.end());
  for (int i = static_cast<int>(pts.size()) - 2; i >= 0; --i)
    pts[i].second = std::max(pts[i].second, pts[i + 1].second);
  double ap = pts.front().first * pts.front().second;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    ap += (pts[i + 1].first - pts[i].first) * 0.5 * (pts[i].second + pts[i + 1].second);
  m.ap = ap;
  return m;
}

EdgeMetrics eval_edge(const EdgeMap& pred, const BinaryMap& gt, const EdgeEvalOptions& opts) {
  return eval_edge(std::vector<EdgeSample>{{&pred, &gt}}, opts);
}

}  // namespace edgegeo
