#pragma once

#include "metacon/param_set.hpp"
#include "metacon/rng.hpp"

#include <string>
#include <vector>

namespace metacon {

// Feed-forward network: tanh on hidden layers, identity on the output.
struct MlpSpec {
  std::vector<int> widths;  // input, hidden..., output
  int in() const { return widths.front(); }
  int out() const { return widths.back(); }
};

// GRU cell (Cho variant: reset applied to the hidden state before the
// candidate's recurrent matmul).
struct GruSpec {
  int in = 0;
  int hidden = 0;
};

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// Scaled-uniform fan-in initialization, biases zero. Parameter names are
// "<prefix>.w<i>" / "<prefix>.b<i>" so whole blocks can be addressed by
// prefix (optimizer masks, checkpoint layout).
void add_mlp(ParamSet& p, const std::string& prefix, const MlpSpec& spec,
             RandomStream& rng);
void add_gru(ParamSet& p, const std::string& prefix, const GruSpec& spec,
             RandomStream& rng);
Mat init_weight(int in, int out, RandomStream& rng);

// Plain forward paths used during rollouts. Rows are batch entries.
Mat mlp_forward(const ParamSet& p, const std::string& prefix,
                const MlpSpec& spec, const Mat& x);
Mat gru_step(const ParamSet& p, const std::string& prefix, const GruSpec& spec,
             const Mat& x, const Mat& h);

// Graph-building twins of the above; gradients flow into the bound params.
Var mlp_forward(Tape& t, const BoundParams& b, const std::string& prefix,
                const MlpSpec& spec, Var x);
Var gru_step(Tape& t, const BoundParams& b, const std::string& prefix,
             const GruSpec& spec, Var x, Var h);

// Diagonal-Gaussian policy head with a state-independent log-std parameter,
// clamped to [kLogStdMin, kLogStdMax]. The mask zeroes the density terms of
// padded action dimensions.
Eigen::RowVectorXd clamp_log_std(const Mat& log_std);
double gaussian_logp(const Eigen::RowVectorXd& action,
                     const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& log_std_clamped,
                     const Eigen::RowVectorXd& mask);
Eigen::RowVectorXd gaussian_sample(const Eigen::RowVectorXd& mean,
                                   const Eigen::RowVectorXd& log_std_clamped,
                                   RandomStream& rng);

// Per-row log densities of `actions` under row-wise `means`: (N x 1).
Var gaussian_logp_rows(Tape& t, Var actions, Var means, Var log_std_param,
                       const Eigen::RowVectorXd& mask);
// Entropy of the head (scalar in the graph; depends only on log_std).
Var gaussian_entropy(Tape& t, Var log_std_param, const Eigen::RowVectorXd& mask);

}  // namespace metacon
