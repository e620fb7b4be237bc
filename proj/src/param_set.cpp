#include "metacon/param_set.hpp"

#include <cmath>
#include <stdexcept>

namespace metacon {

void ParamSet::add(const std::string& name, Mat value) {
  if (index_.count(name))
    throw std::runtime_error("ParamSet: duplicate name '" + name + "'");
  index_[name] = entries_.size();
  entries_.push_back({name, std::move(value)});
}

bool ParamSet::has(const std::string& name) const { return index_.count(name) > 0; }

Mat& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::runtime_error("ParamSet: no entry '" + name + "'");
  return entries_[it->second].value;
}

const Mat& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::runtime_error("ParamSet: no entry '" + name + "'");
  return entries_[it->second].value;
}

long ParamSet::total_count() const {
  long n = 0;
  for (const auto& e : entries_) n += static_cast<long>(e.value.size());
  return n;
}

bool ParamSet::congruent(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.rows() != other.entries_[i].value.rows()) return false;
    if (entries_[i].value.cols() != other.entries_[i].value.cols()) return false;
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const auto& e : entries_)
    if (!e.value.allFinite()) return false;
  return true;
}

double ParamSet::norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value.squaredNorm();
  return std::sqrt(s);
}

void ParamSet::axpy(double a, const ParamSet& other) {
  if (!congruent(other)) throw std::runtime_error("axpy: incongruent sets");
  for (size_t i = 0; i < entries_.size(); ++i)
    entries_[i].value += a * other.entries_[i].value;
}

void ParamSet::fill(double v) {
  for (auto& e : entries_) e.value.setConstant(v);
}

double ParamSet::max_abs_diff(const ParamSet& other) const {
  if (!congruent(other)) throw std::runtime_error("max_abs_diff: incongruent sets");
  double m = 0.0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    double d = (entries_[i].value - other.entries_[i].value).cwiseAbs().maxCoeff();
    if (d > m) m = d;
  }
  return m;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!congruent(other)) return false;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].value != other.entries_[i].value) return false;
  return true;
}

GradSet zeros_like(const ParamSet& p) {
  GradSet g;
  for (const auto& e : p.entries())
    g.add(e.name, Mat::Zero(e.value.rows(), e.value.cols()));
  return g;
}

Var BoundParams::at(const std::string& name) const {
  auto it = vars.find(name);
  if (it == vars.end())
    throw std::runtime_error("BoundParams: no entry '" + name + "'");
  return it->second;
}

BoundParams bind(Tape& tape, const ParamSet& params, bool requires_grad) {
  BoundParams b;
  for (const auto& e : params.entries())
    b.vars[e.name] = tape.leaf(e.value, requires_grad);
  return b;
}

GradSet extract_grads(const Tape& tape, const ParamSet& params,
                      const BoundParams& bound) {
  GradSet g;
  for (const auto& e : params.entries())
    g.add(e.name, tape.grad(bound.at(e.name)));
  return g;
}

double loss_value(const ParamSet& params, const LossBuilder& build) {
  Tape tape;
  BoundParams b = bind(tape, params, false);
  Var loss = build(tape, b);
  return tape.scalar_value(loss);
}

GradSet loss_grads(const ParamSet& params, const LossBuilder& build,
                   double* loss_out) {
  Tape tape;
  BoundParams b = bind(tape, params, true);
  Var loss = build(tape, b);
  if (loss_out) *loss_out = tape.scalar_value(loss);
  tape.backward(loss);
  return extract_grads(tape, params, b);
}

FdResult fd_check(const ParamSet& params, const LossBuilder& build, double eps) {
  GradSet analytic = loss_grads(params, build);
  ParamSet probe = params;
  FdResult res;
  for (size_t ei = 0; ei < probe.entries().size(); ++ei) {
    Mat& m = probe.entries()[ei].value;
    const Mat& ga = analytic.entries()[ei].value;
    for (long i = 0; i < m.size(); ++i) {
      double saved = m.data()[i];
      m.data()[i] = saved + eps;
      double up = loss_value(probe, build);
      m.data()[i] = saved - eps;
      double down = loss_value(probe, build);
      m.data()[i] = saved;
      double cd = (up - down) / (2.0 * eps);
      double a = ga.data()[i];
      double rel = std::abs(a - cd) / (std::abs(a) + std::abs(cd) + 1e-12);
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = probe.entries()[ei].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

}  // namespace metacon
