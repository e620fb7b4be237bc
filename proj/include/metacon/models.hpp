#pragma once

#include "metacon/nets.hpp"
#include "metacon/pg.hpp"

namespace metacon {

// Feed-forward Gaussian policy, optionally with a value head. The backbone
// for scratch experts and for MAML.
struct MlpPolicyConfig {
  std::vector<int> hidden = {64, 64};
  bool value_head = true;
  double log_std_init = -1.0;
};

class MlpPolicyModel : public PGModel {
 public:
  MlpPolicyModel(int obs_dim, int act_dim, MlpPolicyConfig cfg,
                 RandomStream& init_rng);

  ParamSet& params() override { return params_; }
  const ParamSet& params() const override { return params_; }
  SeqEval build_eval(Tape& t, const BoundParams& b,
                     const std::vector<const Trial*>& trials) override;
  std::unique_ptr<Actor> make_actor() override;

  Eigen::RowVectorXd policy_mean(const Eigen::VectorXd& obs) const;
  double state_value(const Eigen::VectorXd& obs) const;
  bool has_value_head() const { return cfg_.value_head; }

  void set_action_mask(const Eigen::RowVectorXd& m) { mask_ = m; }
  const Eigen::RowVectorXd& mask() const { return mask_; }

  const MlpSpec& pi_spec() const { return pi_spec_; }

 private:
  MlpPolicyConfig cfg_;
  MlpSpec pi_spec_, vf_spec_;
  ParamSet params_;
  Eigen::RowVectorXd mask_;
};

}  // namespace metacon
