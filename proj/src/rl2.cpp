#include "metacon/rl2.hpp"

namespace metacon {

namespace {

class Rl2Actor : public Actor {
 public:
  explicit Rl2Actor(const Rl2Model& m) : m_(m) { reset_state(); }

  void begin_trial(const Task&) override { reset_state(); }

  void begin_episode() override {
    if (!m_.config().reset_per_trial) reset_state();
  }

  Eigen::RowVectorXd act(const Eigen::VectorXd& obs, RandomStream& rng,
                         double& logp, double& value,
                         bool deterministic) override {
    Eigen::RowVectorXd x =
        m_.encode_input(obs, prev_action_, prev_reward_, prev_done_);
    hidden_ = gru_step(m_.params(), "gru", m_.gru_spec(), x, hidden_);
    Eigen::RowVectorXd mean =
        mlp_forward(m_.params(), "pi", m_.pi_spec(), hidden_).row(0);
    Eigen::RowVectorXd ls = clamp_log_std(m_.params().at("pi.log_std"));
    Eigen::RowVectorXd a = deterministic ? mean : gaussian_sample(mean, ls, rng);
    logp = gaussian_logp(a, mean, ls, m_.mask());
    value = mlp_forward(m_.params(), "vf", m_.vf_spec(), hidden_)(0, 0);
    return a;
  }

  void observe(const Eigen::RowVectorXd& action, double reward,
               const Eigen::VectorXd&, bool done) override {
    prev_action_ = action;
    prev_reward_ = reward;
    prev_done_ = done ? 1.0 : 0.0;
  }

 private:
  void reset_state() {
    hidden_ = Mat::Zero(1, m_.config().hidden);
    prev_action_ = Eigen::RowVectorXd::Zero(m_.act_dim());
    prev_reward_ = 0.0;
    prev_done_ = 0.0;
  }

  const Rl2Model& m_;
  Mat hidden_;
  Eigen::RowVectorXd prev_action_;
  double prev_reward_ = 0.0;
  double prev_done_ = 0.0;
};

}  // namespace

Rl2Model::Rl2Model(int obs_dim, int act_dim, Rl2Config cfg, RandomStream& init_rng)
    : obs_dim_(obs_dim), act_dim_(act_dim), cfg_(std::move(cfg)) {
  gru_spec_ = {obs_dim_ + act_dim_ + 2, cfg_.hidden};
  add_gru(params_, "gru", gru_spec_, init_rng);
  pi_spec_.widths.push_back(cfg_.hidden);
  for (int w : cfg_.head_hidden) pi_spec_.widths.push_back(w);
  pi_spec_.widths.push_back(act_dim_);
  add_mlp(params_, "pi", pi_spec_, init_rng);
  params_.add("pi.log_std", Mat::Constant(1, act_dim_, cfg_.log_std_init));
  vf_spec_.widths = pi_spec_.widths;
  vf_spec_.widths.back() = 1;
  add_mlp(params_, "vf", vf_spec_, init_rng);
  mask_ = Eigen::RowVectorXd::Ones(act_dim_);
}

Eigen::RowVectorXd Rl2Model::encode_input(const Eigen::VectorXd& obs,
                                          const Eigen::RowVectorXd& prev_action,
                                          double prev_reward,
                                          double prev_done) const {
  Eigen::RowVectorXd x(gru_spec_.in);
  x << obs.transpose(), prev_action, prev_reward, prev_done;
  return x;
}

SeqEval Rl2Model::build_eval(Tape& t, const BoundParams& b,
                             const std::vector<const Trial*>& trials) {
  const long B = static_cast<long>(trials.size());
  const long steps = flatten_size(trials) / B;
  const int n_eps = static_cast<int>(trials[0]->episodes.size());
  const int H = trials[0]->episodes[0].length();
  if (steps != static_cast<long>(n_eps) * H)
    throw std::runtime_error("rl2 build_eval: ragged trials");

  Var hidden = t.constant(Mat::Zero(B, cfg_.hidden));
  std::vector<Var> logps, values;
  logps.reserve(static_cast<size_t>(steps));
  values.reserve(static_cast<size_t>(steps));

  for (int ep = 0; ep < n_eps; ++ep) {
    if (!cfg_.reset_per_trial || ep == 0)
      hidden = t.constant(Mat::Zero(B, cfg_.hidden));
    for (int s = 0; s < H; ++s) {
      Mat x(B, gru_spec_.in);
      Mat acts(B, act_dim_);
      for (long bi = 0; bi < B; ++bi) {
        const Episode& e = trials[static_cast<size_t>(bi)]->episodes[static_cast<size_t>(ep)];
        Eigen::RowVectorXd prev_a = Eigen::RowVectorXd::Zero(act_dim_);
        double prev_r = 0.0, prev_d = 0.0;
        if (s > 0) {
          prev_a = e.traj.actions.row(s - 1);
          prev_r = e.traj.rewards(s - 1);
        } else if (cfg_.reset_per_trial && ep > 0) {
          const Episode& pe =
              trials[static_cast<size_t>(bi)]->episodes[static_cast<size_t>(ep - 1)];
          prev_a = pe.traj.actions.row(H - 1);
          prev_r = pe.traj.rewards(H - 1);
          prev_d = 1.0;
        }
        x.row(bi) = encode_input(e.traj.obs.row(s).transpose(), prev_a, prev_r, prev_d);
        acts.row(bi) = e.traj.actions.row(s);
      }
      hidden = gru_step(t, b, "gru", gru_spec_, t.constant(x), hidden);
      Var mean = mlp_forward(t, b, "pi", pi_spec_, hidden);
      logps.push_back(
          gaussian_logp_rows(t, t.constant(acts), mean, b.at("pi.log_std"), mask_));
      values.push_back(mlp_forward(t, b, "vf", vf_spec_, hidden));
    }
  }

  SeqEval ev;
  ev.logp = vstack(t, logps);
  ev.value = vstack(t, values);
  ev.entropy = gaussian_entropy(t, b.at("pi.log_std"), mask_);
  return ev;
}

std::unique_ptr<Actor> Rl2Model::make_actor() {
  return std::make_unique<Rl2Actor>(*this);
}

Trial rl2_trial(Rl2Model& model, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic) {
  auto actor = model.make_actor();
  return run_trial(*actor, task, n_episodes, rng, deterministic);
}

UpdateDiag rl2_meta_update(Rl2Model& model, Adam& opt, const TaskSpace& space,
                           int trials_per_batch, const PGConfig& cfg,
                           RandomStream& task_rng, RandomStream& rollout_rng,
                           RandomStream& update_rng, long* frames_used) {
  RolloutBatch batch;
  auto actor = model.make_actor();
  for (int i = 0; i < trials_per_batch; ++i) {
    Task task = sample_task(space, task_rng);
    batch.trials.push_back(run_trial(*actor, task, model.config().episodes_per_trial,
                                     rollout_rng));
  }
  if (frames_used) *frames_used += batch.frames();
  return ppo_update(model, opt, batch, cfg, update_rng);
}

}  // namespace metacon
