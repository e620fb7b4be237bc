#pragma once

#include "metacon/rollout.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace metacon {

struct PGConfig {
  double discount = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 1e-3;
  double ppo_clip = 0.2;
  int epochs_per_batch = 4;
  int minibatch_count = 2;
  double entropy_coef = 1e-3;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
};

// G_t = r_t + gamma * G_{t+1}, zero beyond the episode.
Eigen::VectorXd discounted_returns(const Eigen::VectorXd& rewards, double gamma);

// Generalized advantage estimation; `values` carries one bootstrap entry
// beyond the rewards.
Eigen::VectorXd gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                    double gamma, double lambda);

class Adam {
 public:
  Adam() = default;
  Adam(double lr, std::vector<std::string> names);

  // Descent step: params -= lr * mhat / (sqrt(vhat) + eps) on the named
  // subset (all entries when the name list is empty).
  void step(ParamSet& params, const GradSet& grads);

  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  GradSet m, v;
  std::vector<std::string> names;  // empty = every entry
};

double global_norm(const GradSet& g);
void clip_global_norm(GradSet& g, double max_norm);

// Per-step policy evaluation of stored trials under the current parameters.
// logp and value are (N x 1) in the canonical step-major order defined by
// flatten_index(); entropy is a scalar node.
struct SeqEval {
  Var logp;
  Var value;
  Var entropy;
};

class PGModel {
 public:
  virtual ~PGModel() = default;
  virtual ParamSet& params() = 0;
  virtual const ParamSet& params() const = 0;
  // entries the policy-gradient optimizer updates (empty = all)
  virtual std::vector<std::string> policy_param_names() const { return {}; }
  virtual SeqEval build_eval(Tape& t, const BoundParams& b,
                             const std::vector<const Trial*>& trials) = 0;
  virtual std::unique_ptr<Actor> make_actor() = 0;
};

// Canonical flattening of a homogeneous trial minibatch: index of
// (trial b, step t of the trial's concatenated episode timeline) is
// t * n_trials + b. Models and the update code must agree on this order.
long flatten_size(const std::vector<const Trial*>& trials);
Eigen::VectorXd flatten_step_major(const std::vector<const Trial*>& trials,
                                   const std::function<double(const Episode&, int)>& get);
Mat gather_rows_step_major(const std::vector<const Trial*>& trials,
                           const std::function<Eigen::RowVectorXd(const Episode&, int)>& get);

struct UpdateDiag {
  double loss = 0.0;
  double grad_norm = 0.0;
  double param_norm = 0.0;
};

// Clipped-ratio PPO with value loss and entropy bonus; epochs of trial-level
// minibatches, global-norm clipped, applied through `opt`. Advantages are
// GAE, normalized once per batch. Throws "diverged" on a non-finite loss.
UpdateDiag ppo_update(PGModel& model, Adam& opt, const RolloutBatch& batch,
                      const PGConfig& cfg, RandomStream& shuffle_rng);

// Single ascent step on mean(log pi * A), A = discounted returns minus the
// batch-mean return baseline.
UpdateDiag vanilla_pg_update(PGModel& model, const RolloutBatch& batch,
                             double learning_rate, double discount);

// Gradient of the same surrogate at the model's current parameters, without
// applying a step.
GradSet vanilla_pg_grad(PGModel& model, const RolloutBatch& batch,
                        double discount, double* loss_out = nullptr);

}  // namespace metacon
