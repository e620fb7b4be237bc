#pragma once

#include "metacon/curve.hpp"

#include <optional>
#include <string>
#include <vector>

namespace metacon {

// Centered moving average with a shrinking window at the boundaries.
struct SmoothedCurve {
  std::vector<long> frames;
  std::vector<double> values;
  int window = 5;
};

SmoothedCurve smooth(const LearningCurve& curve, int window = 5);

// Highest value of the smoothed curve (the R_pi estimate).
double peak_return(const SmoothedCurve& s);

// First frame at which the smoothed curve comes within 2% of its peak,
// normalized by the frame budget F. The threshold is sign-aware: 0.98*peak
// for positive peaks, 1.02*peak for negative ones, and peak - 0.02*(max-min)
// when the peak is exactly zero.
double time_to_peak(const SmoothedCurve& s, long F);

// (peak(meta) - r_theta0) / (peak(scratch) - r_theta0); nullopt when the
// denominator is within 1e-6 of zero relative to the curves' value range.
std::optional<double> c_score(const LearningCurve& meta,
                              const LearningCurve& scratch, double r_theta0,
                              int window = 5);

// t(scratch) / (t(meta) + 0.01), both normalized by F; capped at 100 by
// construction.
double c_rate(const LearningCurve& scratch, const LearningCurve& meta, long F,
              int window = 5);

// One adaptation or baseline run as the report builder consumes it.
// pair_key joins a meta run with the scratch run measured with the same
// backbone and evaluation protocol.
struct RunRef {
  std::string algo;
  std::string mode;  // "default" | "ga" | "cmt" | "scratch"
  std::string train_space;
  std::string test_space;
  uint32_t seed = 0;
  std::string pair_key;
  long frame_budget = 0;  // 0 = use the report-level F
  LearningCurve curve;
};

struct ConsistencyCell {
  std::string algo, mode, train_space, test_space;
  int seed_count = 0;
  bool defined = false;
  double score = 0.0;          // per-seed scores averaged
  double rate = 0.0;           // per-seed rates averaged
  double score_pooled = 0.0;   // computed on the seed-averaged curves
  std::vector<double> per_seed_score, per_seed_rate;
};

struct ConsistencySummary {
  std::string algo, mode;
  int ood_cells = 0;
  double ood_score_mean = 0.0;  // off-diagonal defined cells only
  double ood_rate_mean = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyCell> cells;
  std::vector<ConsistencySummary> summaries;
};

// Pairs every (algo, mode, train, test, seed) meta run with its scratch run,
// computes both metrics per seed with r_theta0 = the scratch curves' first
// evaluation point averaged over the cell's seeds, and aggregates. Missing
// pairs are an error listing the offenders.
ConsistencyReport build_report(const std::vector<RunRef>& meta_runs,
                               const std::vector<RunRef>& scratch_runs, long F,
                               int window = 5);

// report.csv: algo,mode,train_space,test_space,seed_count,c_score,c_rate,defined
void write_report_csv(const ConsistencyReport& r, const std::string& path);

}  // namespace metacon
