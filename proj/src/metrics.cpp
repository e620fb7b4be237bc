#include "metacon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace metacon {

SmoothedCurve smooth(const LearningCurve& curve, int window) {
  if (curve.points.empty()) throw std::runtime_error("smooth: empty curve");
  const int n = static_cast<int>(curve.points.size());
  const int half = window / 2;
  SmoothedCurve s;
  s.window = window;
  s.frames.reserve(static_cast<size_t>(n));
  s.values.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += curve.points[static_cast<size_t>(j)].mean_return;
    s.frames.push_back(curve.points[static_cast<size_t>(i)].frame);
    s.values.push_back(acc / (hi - lo + 1));
  }
  return s;
}

double peak_return(const SmoothedCurve& s) {
  if (s.values.empty()) throw std::runtime_error("peak_return: empty curve");
  return *std::max_element(s.values.begin(), s.values.end());
}

double time_to_peak(const SmoothedCurve& s, long F) {
  if (s.values.empty()) throw std::runtime_error("time_to_peak: empty curve");
  if (F <= 0) throw std::runtime_error("time_to_peak: F must be positive");
  const double peak = peak_return(s);
  double threshold;
  if (peak > 0.0) {
    threshold = 0.98 * peak;
  } else if (peak < 0.0) {
    threshold = 1.02 * peak;
  } else {
    const auto [mn, mx] = std::minmax_element(s.values.begin(), s.values.end());
    threshold = peak - 0.02 * (*mx - *mn);
  }
  for (size_t i = 0; i < s.values.size(); ++i)
    if (s.values[i] >= threshold)
      return static_cast<double>(s.frames[i]) / static_cast<double>(F);
  // unreachable: the argmax itself satisfies the threshold
  return static_cast<double>(s.frames.back()) / static_cast<double>(F);
}

namespace {
std::optional<double> c_score_impl(double peak_meta, double peak_scratch,
                                   double range, double r_theta0) {
  const double den = peak_scratch - r_theta0;
  if (std::abs(den) < 1e-6 * range) return std::nullopt;
  return (peak_meta - r_theta0) / den;
}
}  // namespace

std::optional<double> c_score(const LearningCurve& meta,
                              const LearningCurve& scratch, double r_theta0,
                              int window) {
  SmoothedCurve sm = smooth(meta, window);
  SmoothedCurve ss = smooth(scratch, window);
  double mn = sm.values[0], mx = sm.values[0];
  for (double v : sm.values) { mn = std::min(mn, v); mx = std::max(mx, v); }
  for (double v : ss.values) { mn = std::min(mn, v); mx = std::max(mx, v); }
  return c_score_impl(peak_return(sm), peak_return(ss), mx - mn, r_theta0);
}

double c_rate(const LearningCurve& scratch, const LearningCurve& meta, long F,
              int window) {
  const double ts = time_to_peak(smooth(scratch, window), F);
  const double tm = time_to_peak(smooth(meta, window), F);
  return ts / (tm + 0.01);
}

namespace {

struct CellKey {
  std::string algo, mode, train, test;
  bool operator<(const CellKey& o) const {
    return std::tie(algo, mode, train, test) <
           std::tie(o.algo, o.mode, o.train, o.test);
  }
};

LearningCurve average_curves(const std::vector<const LearningCurve*>& curves) {
  LearningCurve out;
  const size_t n = curves[0]->points.size();
  for (const auto* c : curves)
    if (c->points.size() != n)
      throw std::runtime_error("average_curves: point-count mismatch");
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto* c : curves) acc += c->points[i].mean_return;
    out.points.push_back({curves[0]->points[i].frame,
                          acc / static_cast<double>(curves.size())});
  }
  return out;
}

}  // namespace

ConsistencyReport build_report(const std::vector<RunRef>& meta_runs,
                               const std::vector<RunRef>& scratch_runs, long F,
                               int window) {
  std::map<std::pair<std::string, uint32_t>, const RunRef*> scratch_by_key;
  for (const auto& r : scratch_runs) scratch_by_key[{r.pair_key, r.seed}] = &r;

  std::map<CellKey, std::vector<const RunRef*>> cells;
  std::vector<std::string> missing;
  for (const auto& r : meta_runs) {
    if (!scratch_by_key.count({r.pair_key, r.seed})) {
      missing.push_back(r.pair_key + "/seed" + std::to_string(r.seed));
      continue;
    }
    cells[{r.algo, r.mode, r.train_space, r.test_space}].push_back(&r);
  }
  if (!missing.empty()) {
    std::string msg = "unpaired runs:";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }

  ConsistencyReport report;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      ood_acc;  // (algo, mode) -> (scores, rates)

  for (auto& [key, runs] : cells) {
    ConsistencyCell cell;
    cell.algo = key.algo;
    cell.mode = key.mode;
    cell.train_space = key.train;
    cell.test_space = key.test;
    cell.seed_count = static_cast<int>(runs.size());

    // r_theta0: first evaluation point of the paired scratch runs, averaged
    // over the cell's seeds
    double r0 = 0.0;
    std::vector<const LearningCurve*> meta_curves, scratch_curves;
    for (const auto* r : runs) {
      const RunRef* s = scratch_by_key.at({r->pair_key, r->seed});
      r0 += s->curve.points.front().mean_return;
      meta_curves.push_back(&r->curve);
      scratch_curves.push_back(&s->curve);
    }
    r0 /= static_cast<double>(runs.size());

    cell.defined = true;
    for (size_t i = 0; i < runs.size(); ++i) {
      auto sc = c_score(*meta_curves[i], *scratch_curves[i], r0, window);
      if (!sc) {
        cell.defined = false;
        continue;
      }
      const long budget = runs[i]->frame_budget > 0 ? runs[i]->frame_budget : F;
      cell.per_seed_score.push_back(*sc);
      cell.per_seed_rate.push_back(
          c_rate(*scratch_curves[i], *meta_curves[i], budget, window));
    }
    if (cell.defined && !cell.per_seed_score.empty()) {
      for (double v : cell.per_seed_score) cell.score += v;
      cell.score /= static_cast<double>(cell.per_seed_score.size());
      for (double v : cell.per_seed_rate) cell.rate += v;
      cell.rate /= static_cast<double>(cell.per_seed_rate.size());
      auto pooled = c_score(average_curves(meta_curves), average_curves(scratch_curves),
                            r0, window);
      cell.score_pooled = pooled.value_or(cell.score);
      if (cell.train_space != cell.test_space) {
        auto& acc = ood_acc[{cell.algo, cell.mode}];
        acc.first.push_back(cell.score);
        acc.second.push_back(cell.rate);
      }
    } else {
      cell.defined = false;
    }
    report.cells.push_back(std::move(cell));
  }

  for (auto& [am, acc] : ood_acc) {
    ConsistencySummary s;
    s.algo = am.first;
    s.mode = am.second;
    s.ood_cells = static_cast<int>(acc.first.size());
    for (double v : acc.first) s.ood_score_mean += v;
    for (double v : acc.second) s.ood_rate_mean += v;
    if (s.ood_cells > 0) {
      s.ood_score_mean /= s.ood_cells;
      s.ood_rate_mean /= s.ood_cells;
    }
    report.summaries.push_back(std::move(s));
  }
  return report;
}

void write_report_csv(const ConsistencyReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algo,mode,train_space,test_space,seed_count,c_score,c_rate,defined\n";
  char buf[128];
  for (const auto& c : r.cells) {
    if (c.defined)
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,1", c.score, c.rate);
    else
      std::snprintf(buf, sizeof(buf), ",,0");
    out << c.algo << "," << c.mode << "," << c.train_space << ","
        << c.test_space << "," << c.seed_count << "," << buf << "\n";
  }
}

}  // namespace metacon
