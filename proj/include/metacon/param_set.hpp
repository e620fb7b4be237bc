#pragma once

#include "metacon/tape.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace metacon {

// Named, shaped collection of real-valued tensors. Shapes are fixed at
// creation; values stay mutable. Gradients travel in the same structure.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Mat value;
  };

  void add(const std::string& name, Mat value);
  bool has(const std::string& name) const;
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  size_t size() const { return entries_.size(); }
  long total_count() const;

  bool congruent(const ParamSet& other) const;  // same names and shapes, in order
  bool all_finite() const;
  double norm() const;  // global L2 norm over every entry

  // in-place axpy over congruent sets: this += a * other
  void axpy(double a, const ParamSet& other);
  void fill(double v);
  double max_abs_diff(const ParamSet& other) const;

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

using GradSet = ParamSet;

GradSet zeros_like(const ParamSet& p);

// Tape leaves for every entry of a ParamSet.
struct BoundParams {
  std::map<std::string, Var> vars;
  Var at(const std::string& name) const;
};

BoundParams bind(Tape& tape, const ParamSet& params, bool requires_grad = true);

// Reads adjoints for every bound parameter after backward().
GradSet extract_grads(const Tape& tape, const ParamSet& params,
                      const BoundParams& bound);

// A loss expressed as a graph over parameter leaves. The builder must be
// deterministic: any sampling noise has to be captured before building.
using LossBuilder = std::function<Var(Tape&, const BoundParams&)>;

double loss_value(const ParamSet& params, const LossBuilder& build);
GradSet loss_grads(const ParamSet& params, const LossBuilder& build,
                   double* loss_out = nullptr);

struct FdResult {
  double max_rel_err = 0.0;
  std::string worst_param;
};

// Central-difference check of the analytic gradient, entry by entry.
// Relative error uses |analytic - cd| / (|analytic| + |cd| + 1e-12).
FdResult fd_check(const ParamSet& params, const LossBuilder& build,
                  double eps = 1e-5);

}  // namespace metacon
