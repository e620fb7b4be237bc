#pragma once

#include "metacon/nets.hpp"
#include "metacon/pg.hpp"

namespace metacon {

// Recurrent policy whose input at each step is
// [obs, prev_action, prev_reward, prev_done]. Adaptation happens inside the
// hidden state. The hidden state (and the prev-* inputs) reset before each
// episode by default; reset_per_trial keeps them across the episodes of a
// trial instead, with the done flag marking episode boundaries.
struct Rl2Config {
  int hidden = 64;
  std::vector<int> head_hidden = {64};
  double log_std_init = -1.0;
  bool reset_per_trial = false;
  int episodes_per_trial = 2;
};

class Rl2Model : public PGModel {
 public:
  Rl2Model(int obs_dim, int act_dim, Rl2Config cfg, RandomStream& init_rng);

  ParamSet& params() override { return params_; }
  const ParamSet& params() const override { return params_; }
  SeqEval build_eval(Tape& t, const BoundParams& b,
                     const std::vector<const Trial*>& trials) override;
  std::unique_ptr<Actor> make_actor() override;

  const Rl2Config& config() const { return cfg_; }
  const GruSpec& gru_spec() const { return gru_spec_; }
  const MlpSpec& pi_spec() const { return pi_spec_; }
  const MlpSpec& vf_spec() const { return vf_spec_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  void set_action_mask(const Eigen::RowVectorXd& m) { mask_ = m; }
  const Eigen::RowVectorXd& mask() const { return mask_; }

  // step input encoding
  Eigen::RowVectorXd encode_input(const Eigen::VectorXd& obs,
                                  const Eigen::RowVectorXd& prev_action,
                                  double prev_reward, double prev_done) const;

 private:
  int obs_dim_, act_dim_;
  Rl2Config cfg_;
  GruSpec gru_spec_;
  MlpSpec pi_spec_, vf_spec_;
  ParamSet params_;
  Eigen::RowVectorXd mask_;
};

// One RL^2 trial: n episodes run sequentially on the same task.
Trial rl2_trial(Rl2Model& model, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic = false);

// PPO through the unrolled recurrent policy on a batch of trials whose tasks
// are sampled from `space`.
UpdateDiag rl2_meta_update(Rl2Model& model, Adam& opt, const TaskSpace& space,
                           int trials_per_batch, const PGConfig& cfg,
                           RandomStream& task_rng, RandomStream& rollout_rng,
                           RandomStream& update_rng, long* frames_used);

}  // namespace metacon
