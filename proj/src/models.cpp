#include "metacon/models.hpp"

namespace metacon {

namespace {

class MlpActor : public Actor {
 public:
  explicit MlpActor(const MlpPolicyModel& m) : m_(m) {}

  void begin_trial(const Task&) override {}
  void begin_episode() override {}

  Eigen::RowVectorXd act(const Eigen::VectorXd& obs, RandomStream& rng,
                         double& logp, double& value,
                         bool deterministic) override {
    Eigen::RowVectorXd mean = m_.policy_mean(obs);
    Eigen::RowVectorXd ls = clamp_log_std(m_.params().at("pi.log_std"));
    Eigen::RowVectorXd a =
        deterministic ? mean : gaussian_sample(mean, ls, rng);
    logp = gaussian_logp(a, mean, ls, m_.mask());
    value = m_.has_value_head() ? m_.state_value(obs) : 0.0;
    return a;
  }

 private:
  const MlpPolicyModel& m_;
};

}  // namespace

MlpPolicyModel::MlpPolicyModel(int obs_dim, int act_dim, MlpPolicyConfig cfg,
                               RandomStream& init_rng)
    : cfg_(std::move(cfg)) {
  pi_spec_.widths.push_back(obs_dim);
  for (int w : cfg_.hidden) pi_spec_.widths.push_back(w);
  pi_spec_.widths.push_back(act_dim);
  add_mlp(params_, "pi", pi_spec_, init_rng);
  params_.add("pi.log_std", Mat::Constant(1, act_dim, cfg_.log_std_init));
  if (cfg_.value_head) {
    vf_spec_.widths = pi_spec_.widths;
    vf_spec_.widths.back() = 1;
    add_mlp(params_, "vf", vf_spec_, init_rng);
  }
  mask_ = Eigen::RowVectorXd::Ones(act_dim);
}

Eigen::RowVectorXd MlpPolicyModel::policy_mean(const Eigen::VectorXd& obs) const {
  return mlp_forward(params_, "pi", pi_spec_, obs.transpose()).row(0);
}

double MlpPolicyModel::state_value(const Eigen::VectorXd& obs) const {
  return mlp_forward(params_, "vf", vf_spec_, obs.transpose())(0, 0);
}

SeqEval MlpPolicyModel::build_eval(Tape& t, const BoundParams& b,
                                   const std::vector<const Trial*>& trials) {
  Mat obs = gather_rows_step_major(
      trials, [](const Episode& e, int s) -> Eigen::RowVectorXd {
        return e.traj.obs.row(s);
      });
  Mat acts = gather_rows_step_major(
      trials, [](const Episode& e, int s) -> Eigen::RowVectorXd {
        return e.traj.actions.row(s);
      });
  Var obs_v = t.constant(obs);
  Var mean = mlp_forward(t, b, "pi", pi_spec_, obs_v);
  SeqEval ev;
  ev.logp = gaussian_logp_rows(t, t.constant(acts), mean, b.at("pi.log_std"), mask_);
  ev.entropy = gaussian_entropy(t, b.at("pi.log_std"), mask_);
  if (cfg_.value_head) ev.value = mlp_forward(t, b, "vf", vf_spec_, obs_v);
  return ev;
}

std::unique_ptr<Actor> MlpPolicyModel::make_actor() {
  return std::make_unique<MlpActor>(*this);
}

}  // namespace metacon
