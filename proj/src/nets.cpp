#include "metacon/nets.hpp"

#include <cmath>
#include <numbers>

namespace metacon {

Mat init_weight(int in, int out, RandomStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Mat w(in, out);
  for (long i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  return w;
}

void add_mlp(ParamSet& p, const std::string& prefix, const MlpSpec& spec,
             RandomStream& rng) {
  if (spec.widths.size() < 3)
    throw std::runtime_error("MlpSpec needs at least one hidden layer");
  for (size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    p.add(prefix + ".w" + std::to_string(l),
          init_weight(spec.widths[l], spec.widths[l + 1], rng));
    p.add(prefix + ".b" + std::to_string(l),
          Mat::Zero(1, spec.widths[l + 1]));
  }
}

void add_gru(ParamSet& p, const std::string& prefix, const GruSpec& spec,
             RandomStream& rng) {
  if (spec.in <= 0 || spec.hidden <= 0)
    throw std::runtime_error("GruSpec dims must be positive");
  for (const char* g : {"r", "z", "n"}) {
    p.add(prefix + ".wi" + g, init_weight(spec.in, spec.hidden, rng));
    p.add(prefix + ".wh" + g, init_weight(spec.hidden, spec.hidden, rng));
    p.add(prefix + ".b" + g, Mat::Zero(1, spec.hidden));
  }
}

Mat mlp_forward(const ParamSet& p, const std::string& prefix,
                const MlpSpec& spec, const Mat& x) {
  if (x.cols() != spec.in())
    throw std::runtime_error("mlp_forward: dimension mismatch");
  Mat h = x;
  const size_t layers = spec.widths.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    h = (h * p.at(prefix + ".w" + std::to_string(l))).rowwise() +
        p.at(prefix + ".b" + std::to_string(l)).row(0);
    if (l + 1 < layers) h = h.array().tanh().matrix();
  }
  return h;
}

Var mlp_forward(Tape& t, const BoundParams& b, const std::string& prefix,
                const MlpSpec& spec, Var x) {
  Var h = x;
  const size_t layers = spec.widths.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    h = t.add_row(t.matmul(h, b.at(prefix + ".w" + std::to_string(l))),
                  b.at(prefix + ".b" + std::to_string(l)));
    if (l + 1 < layers) h = t.tanh(h);
  }
  return h;
}

static Mat sigmoid_m(const Mat& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Mat gru_step(const ParamSet& p, const std::string& prefix, const GruSpec& spec,
             const Mat& x, const Mat& h) {
  if (x.cols() != spec.in || h.cols() != spec.hidden || x.rows() != h.rows())
    throw std::runtime_error("gru_step: dimension mismatch");
  Mat r = sigmoid_m(((x * p.at(prefix + ".wir") + h * p.at(prefix + ".whr")).rowwise() +
                     p.at(prefix + ".br").row(0)));
  Mat z = sigmoid_m(((x * p.at(prefix + ".wiz") + h * p.at(prefix + ".whz")).rowwise() +
                     p.at(prefix + ".bz").row(0)));
  Mat n = (((x * p.at(prefix + ".win") + (r.cwiseProduct(h)) * p.at(prefix + ".whn"))
                .rowwise() +
            p.at(prefix + ".bn").row(0))
               .array()
               .tanh())
              .matrix();
  return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
}

Var gru_step(Tape& t, const BoundParams& b, const std::string& prefix,
             const GruSpec& spec, Var x, Var h) {
  (void)spec;
  Var r = t.sigmoid(t.add_row(
      t.add(t.matmul(x, b.at(prefix + ".wir")), t.matmul(h, b.at(prefix + ".whr"))),
      b.at(prefix + ".br")));
  Var z = t.sigmoid(t.add_row(
      t.add(t.matmul(x, b.at(prefix + ".wiz")), t.matmul(h, b.at(prefix + ".whz"))),
      b.at(prefix + ".bz")));
  Var n = t.tanh(t.add_row(
      t.add(t.matmul(x, b.at(prefix + ".win")),
            t.matmul(t.mul(r, h), b.at(prefix + ".whn"))),
      b.at(prefix + ".bn")));
  // h' = (1 - z) ∘ n + z ∘ h
  return t.add(t.sub(n, t.mul(z, n)), t.mul(z, h));
}

Eigen::RowVectorXd clamp_log_std(const Mat& log_std) {
  return log_std.row(0).array().max(kLogStdMin).min(kLogStdMax).matrix();
}

double gaussian_logp(const Eigen::RowVectorXd& action,
                     const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& log_std_clamped,
                     const Eigen::RowVectorXd& mask) {
  const auto sigma = log_std_clamped.array().exp();
  const auto z = (action - mean).array() / sigma;
  const double k_eff = mask.sum();
  return -0.5 * (z.square() * mask.array()).sum() -
         (log_std_clamped.array() * mask.array()).sum() -
         0.5 * k_eff * std::log(2.0 * std::numbers::pi);
}

Eigen::RowVectorXd gaussian_sample(const Eigen::RowVectorXd& mean,
                                   const Eigen::RowVectorXd& log_std_clamped,
                                   RandomStream& rng) {
  Eigen::RowVectorXd a(mean.cols());
  for (int i = 0; i < mean.cols(); ++i)
    a(i) = mean(i) + std::exp(log_std_clamped(i)) * rng.normal();
  return a;
}

Var gaussian_logp_rows(Tape& t, Var actions, Var means, Var log_std_param,
                       const Eigen::RowVectorXd& mask) {
  const int k = static_cast<int>(mask.cols());
  Var ls = t.clamp(log_std_param, kLogStdMin, kLogStdMax);
  Var inv_sigma = t.exp(t.neg(ls));                     // 1 x k
  Var z = t.mul_row(t.sub(actions, means), inv_sigma);  // N x k
  Var z2 = t.mul(z, z);
  Var mask_row = t.constant(mask);
  Var quad = t.row_sum(t.mul_row(z2, mask_row));  // N x 1
  const double k_eff = mask.sum();
  // per-row: -0.5*quad - sum(mask∘log_std) - k_eff/2 * ln(2π)
  Var ls_sum = t.sum(t.mul(ls, mask_row));  // 1 x 1
  Var logp = t.add_row(t.scale(quad, -0.5), t.neg(ls_sum));
  (void)k;
  return t.add_const(logp, -0.5 * k_eff * std::log(2.0 * std::numbers::pi));
}

Var gaussian_entropy(Tape& t, Var log_std_param, const Eigen::RowVectorXd& mask) {
  Var ls = t.clamp(log_std_param, kLogStdMin, kLogStdMax);
  Var mask_row = t.constant(mask);
  const double k_eff = mask.sum();
  return t.add_const(t.sum(t.mul(ls, mask_row)),
                     0.5 * k_eff * (1.0 + std::log(2.0 * std::numbers::pi)));
}

}  // namespace metacon
