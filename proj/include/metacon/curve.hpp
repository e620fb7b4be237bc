#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace metacon {

// Ordered (frame, mean evaluation return) samples from one run.
struct CurvePoint {
  long frame = 0;
  double mean_return = 0.0;
};

struct LearningCurve {
  std::string run_id;
  uint32_t seed = 0;
  std::vector<CurvePoint> points;

  void add(long frame, double mean_return);
  long final_frame() const { return points.empty() ? 0 : points.back().frame; }
  std::vector<double> values() const;
  std::vector<long> frames() const;
};

// Append-only CSV log: run_id,seed,frame,mean_return
void write_curve_csv(const LearningCurve& c, const std::string& path);
LearningCurve read_curve_csv(const std::string& path);

}  // namespace metacon
