#pragma once

#include "metacon/nets.hpp"
#include "metacon/pg.hpp"

namespace metacon {

// Decoupled task-inference agent: a GRU trajectory encoder produces a
// diagonal-Gaussian belief over a task latent; reward and next-state
// decoders train the encoder (VAE); the policy consumes [obs, mu, sigma]
// and never backpropagates into the encoder.
struct VaribadConfig {
  int latent = 0;  // 0 = per-family default (2 for navigation, 5 for dash)
  int enc_hidden = 64;
  std::vector<int> dec_hidden = {32};
  std::vector<int> pi_hidden = {64, 64};
  double log_std_init = -1.0;
  double kl_weight = 0.1;
  double reward_loss_w = 1.0;
  double state_loss_w = 1.0;
  double vae_lr = 1e-3;
  double vae_grad_clip = 10.0;
  int vae_batch = 4;           // trajectories per VAE update
  bool reset_per_trial = false;
  int episodes_per_trial = 2;
};

class VaribadModel : public PGModel {
 public:
  VaribadModel(int obs_dim, int act_dim, VaribadConfig cfg, RandomStream& init_rng);

  ParamSet& params() override { return params_; }
  const ParamSet& params() const override { return params_; }
  std::vector<std::string> policy_param_names() const override;
  std::vector<std::string> vae_param_names() const;
  SeqEval build_eval(Tape& t, const BoundParams& b,
                     const std::vector<const Trial*>& trials) override;
  std::unique_ptr<Actor> make_actor() override;

  const VaribadConfig& config() const { return cfg_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const GruSpec& enc_spec() const { return enc_spec_; }
  const MlpSpec& pi_spec() const { return pi_spec_; }
  const MlpSpec& vf_spec() const { return vf_spec_; }

  void set_action_mask(const Eigen::RowVectorXd& m) { mask_ = m; }
  const Eigen::RowVectorXd& mask() const { return mask_; }

  // belief (mu, sigma) from an encoder hidden state
  Eigen::RowVectorXd belief_from_hidden(const Mat& hidden) const;
  Eigen::RowVectorXd encoder_input(const Eigen::VectorXd& next_obs,
                                   const Eigen::RowVectorXd& action,
                                   double reward) const;

  // Full ELBO of one trajectory: sum over all posterior steps t of the
  // reconstruction of every (reward, next state) in the trajectory from a
  // latent sampled at q(m | tau_{:t}), plus kl_weight * sum KL(q_t || q_{t-1})
  // with q_{-1} = N(0, I). `eps` is the frozen reparameterization noise,
  // (H+1) x latent.
  Var vae_loss(Tape& t, const BoundParams& b, const Trajectory& traj,
               const Mat& eps) const;

  UpdateDiag vae_update(const std::vector<const Episode*>& episodes,
                        Adam& vae_opt, RandomStream& noise_rng);

 private:
  int obs_dim_, act_dim_;
  VaribadConfig cfg_;
  GruSpec enc_spec_;
  MlpSpec rdec_spec_, sdec_spec_, pi_spec_, vf_spec_;
  ParamSet params_;
  Eigen::RowVectorXd mask_;
};

// One policy update on the belief-augmented MDP (encoder features frozen)
// plus one VAE update on the collected trajectories.
UpdateDiag varibad_meta_update(VaribadModel& model, Adam& policy_opt,
                               Adam& vae_opt, const TaskSpace& space,
                               int trials_per_batch, const PGConfig& cfg,
                               RandomStream& task_rng, RandomStream& rollout_rng,
                               RandomStream& update_rng, long* frames_used);

}  // namespace metacon
