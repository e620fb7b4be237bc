#include "metacon/curve.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace metacon {

void LearningCurve::add(long frame, double mean_return) {
  if (!points.empty() && frame <= points.back().frame)
    throw std::runtime_error("LearningCurve: frames must be strictly increasing");
  points.push_back({frame, mean_return});
}

std::vector<double> LearningCurve::values() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.mean_return);
  return v;
}

std::vector<long> LearningCurve::frames() const {
  std::vector<long> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.frame);
  return v;
}

void write_curve_csv(const LearningCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run_id,seed,frame,mean_return\n";
  char buf[64];
  for (const auto& p : c.points) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.mean_return);
    out << c.run_id << "," << c.seed << "," << p.frame << "," << buf << "\n";
  }
}

LearningCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  LearningCurve c;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string run_id, seed, frame, ret;
    std::getline(ss, run_id, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, frame, ',');
    std::getline(ss, ret, ',');
    c.run_id = run_id;
    c.seed = static_cast<uint32_t>(std::stoul(seed));
    c.points.push_back({std::stol(frame), std::stod(ret)});
  }
  return c;
}

}  // namespace metacon
