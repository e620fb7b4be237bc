#include "metacon/varibad.hpp"

namespace metacon {

namespace {

class VaribadActor : public Actor {
 public:
  explicit VaribadActor(const VaribadModel& m) : m_(m) { reset_state(); }

  void begin_trial(const Task&) override { reset_state(); }

  void begin_episode() override {
    if (!m_.config().reset_per_trial) reset_state();
  }

  Eigen::RowVectorXd act(const Eigen::VectorXd& obs, RandomStream& rng,
                         double& logp, double& value,
                         bool deterministic) override {
    Eigen::RowVectorXd input(obs.size() + belief_.size());
    input << obs.transpose(), belief_;
    Eigen::RowVectorXd mean =
        mlp_forward(m_.params(), "pi", m_.pi_spec(), input).row(0);
    Eigen::RowVectorXd ls = clamp_log_std(m_.params().at("pi.log_std"));
    Eigen::RowVectorXd a = deterministic ? mean : gaussian_sample(mean, ls, rng);
    logp = gaussian_logp(a, mean, ls, m_.mask());
    value = mlp_forward(m_.params(), "vf", m_.vf_spec(), input)(0, 0);
    return a;
  }

  void observe(const Eigen::RowVectorXd& action, double reward,
               const Eigen::VectorXd& next_obs, bool) override {
    Eigen::RowVectorXd x = m_.encoder_input(next_obs, action, reward);
    hidden_ = gru_step(m_.params(), "enc.gru", m_.enc_spec(), x, hidden_);
    belief_ = m_.belief_from_hidden(hidden_);
  }

  Eigen::RowVectorXd belief() const override { return belief_; }

 private:
  void reset_state() {
    hidden_ = Mat::Zero(1, m_.enc_spec().hidden);
    belief_ = m_.belief_from_hidden(hidden_);
  }

  const VaribadModel& m_;
  Mat hidden_;
  Eigen::RowVectorXd belief_;
};

}  // namespace

VaribadModel::VaribadModel(int obs_dim, int act_dim, VaribadConfig cfg,
                           RandomStream& init_rng)
    : obs_dim_(obs_dim), act_dim_(act_dim), cfg_(std::move(cfg)) {
  if (cfg_.latent <= 0) throw std::runtime_error("VaribadConfig: latent dim unset");
  enc_spec_ = {obs_dim_ + act_dim_ + 1, cfg_.enc_hidden};
  add_gru(params_, "enc.gru", enc_spec_, init_rng);
  params_.add("enc.mu.w", init_weight(cfg_.enc_hidden, cfg_.latent, init_rng));
  params_.add("enc.mu.b", Mat::Zero(1, cfg_.latent));
  params_.add("enc.ls.w", init_weight(cfg_.enc_hidden, cfg_.latent, init_rng));
  params_.add("enc.ls.b", Mat::Zero(1, cfg_.latent));

  const int dec_in = cfg_.latent + obs_dim_ + act_dim_;
  rdec_spec_.widths.push_back(dec_in);
  for (int w : cfg_.dec_hidden) rdec_spec_.widths.push_back(w);
  rdec_spec_.widths.push_back(1);
  add_mlp(params_, "rdec", rdec_spec_, init_rng);
  sdec_spec_ = rdec_spec_;
  sdec_spec_.widths.back() = obs_dim_;
  add_mlp(params_, "sdec", sdec_spec_, init_rng);

  pi_spec_.widths.push_back(obs_dim_ + 2 * cfg_.latent);
  for (int w : cfg_.pi_hidden) pi_spec_.widths.push_back(w);
  pi_spec_.widths.push_back(act_dim_);
  add_mlp(params_, "pi", pi_spec_, init_rng);
  params_.add("pi.log_std", Mat::Constant(1, act_dim_, cfg_.log_std_init));
  vf_spec_ = pi_spec_;
  vf_spec_.widths.back() = 1;
  add_mlp(params_, "vf", vf_spec_, init_rng);
  mask_ = Eigen::RowVectorXd::Ones(act_dim_);
}

std::vector<std::string> VaribadModel::policy_param_names() const {
  std::vector<std::string> out;
  for (const auto& e : params_.entries())
    if (e.name.rfind("pi.", 0) == 0 || e.name.rfind("vf.", 0) == 0)
      out.push_back(e.name);
  return out;
}

std::vector<std::string> VaribadModel::vae_param_names() const {
  std::vector<std::string> out;
  for (const auto& e : params_.entries())
    if (e.name.rfind("enc.", 0) == 0 || e.name.rfind("rdec.", 0) == 0 ||
        e.name.rfind("sdec.", 0) == 0)
      out.push_back(e.name);
  return out;
}

Eigen::RowVectorXd VaribadModel::belief_from_hidden(const Mat& hidden) const {
  Eigen::RowVectorXd mu =
      (hidden * params_.at("enc.mu.w")).row(0) + params_.at("enc.mu.b").row(0);
  Eigen::RowVectorXd ls =
      (hidden * params_.at("enc.ls.w")).row(0) + params_.at("enc.ls.b").row(0);
  Eigen::RowVectorXd out(2 * cfg_.latent);
  out << mu, ls.array().exp().matrix();
  return out;
}

Eigen::RowVectorXd VaribadModel::encoder_input(const Eigen::VectorXd& next_obs,
                                               const Eigen::RowVectorXd& action,
                                               double reward) const {
  Eigen::RowVectorXd x(enc_spec_.in);
  x << next_obs.transpose(), action, reward;
  return x;
}

SeqEval VaribadModel::build_eval(Tape& t, const BoundParams& b,
                                 const std::vector<const Trial*>& trials) {
  // policy sees the beliefs recorded at collection time (fixed features)
  Mat inputs = gather_rows_step_major(
      trials, [](const Episode& e, int s) -> Eigen::RowVectorXd {
        Eigen::RowVectorXd r(e.traj.obs.cols() + e.beliefs.cols());
        r << e.traj.obs.row(s), e.beliefs.row(s);
        return r;
      });
  Mat acts = gather_rows_step_major(
      trials, [](const Episode& e, int s) -> Eigen::RowVectorXd {
        return e.traj.actions.row(s);
      });
  Var in_v = t.constant(inputs);
  Var mean = mlp_forward(t, b, "pi", pi_spec_, in_v);
  SeqEval ev;
  ev.logp = gaussian_logp_rows(t, t.constant(acts), mean, b.at("pi.log_std"), mask_);
  ev.value = mlp_forward(t, b, "vf", vf_spec_, in_v);
  ev.entropy = gaussian_entropy(t, b.at("pi.log_std"), mask_);
  return ev;
}

std::unique_ptr<Actor> VaribadModel::make_actor() {
  return std::make_unique<VaribadActor>(*this);
}

Var VaribadModel::vae_loss(Tape& t, const BoundParams& b, const Trajectory& traj,
                           const Mat& eps) const {
  const int H = traj.length();
  const int m = cfg_.latent;
  if (eps.rows() != H + 1 || eps.cols() != m)
    throw std::runtime_error("vae_loss: eps must be (H+1) x latent");

  // encoder unroll over the H transitions; posterior t uses the hidden
  // state after t transitions (t = 0 is the zero-hidden prior head)
  std::vector<Var> hiddens;
  hiddens.reserve(static_cast<size_t>(H) + 1);
  Var h = t.constant(Mat::Zero(1, cfg_.enc_hidden));
  hiddens.push_back(h);
  for (int i = 0; i < H; ++i) {
    Eigen::VectorXd next_obs =
        i + 1 < H ? Eigen::VectorXd(traj.obs.row(i + 1).transpose())
                  : traj.final_obs;
    Eigen::RowVectorXd x = encoder_input(
        next_obs, traj.actions.row(i), traj.rewards(i));
    h = gru_step(t, b, "enc.gru", enc_spec_, t.constant(x), h);
    hiddens.push_back(h);
  }
  Var h_all = vstack(t, hiddens);  // (H+1) x enc_hidden
  Var mu = t.add_row(t.matmul(h_all, b.at("enc.mu.w")), b.at("enc.mu.b"));
  Var ls = t.add_row(t.matmul(h_all, b.at("enc.ls.w")), b.at("enc.ls.b"));

  // reparameterized latent sample per posterior step
  Var latents = t.add(mu, t.mul(t.exp(ls), t.constant(eps)));  // (H+1) x m

  // cross every latent with every transition: row (tt * H + j)
  Mat sa(H, obs_dim_ + act_dim_);
  Mat next_states(H, obs_dim_);
  for (int j = 0; j < H; ++j) {
    sa.row(j) << traj.obs.row(j), traj.actions.row(j);
    next_states.row(j) = j + 1 < H ? traj.obs.row(j + 1)
                                   : Eigen::RowVectorXd(traj.final_obs.transpose());
  }
  Var dec_in = t.concat_cols(t.repeat_rows(latents, H),
                             t.constant(sa.replicate(H + 1, 1)));
  Var r_hat = mlp_forward(t, b, "rdec", rdec_spec_, dec_in);
  Var s_hat = mlp_forward(t, b, "sdec", sdec_spec_, dec_in);
  Var r_err = t.sub(r_hat, t.constant(Mat(traj.rewards.replicate(H + 1, 1))));
  Var s_err = t.sub(s_hat, t.constant(Mat(next_states.replicate(H + 1, 1))));
  Var recon = t.add(t.scale(t.sum(t.mul(r_err, r_err)), cfg_.reward_loss_w),
                    t.scale(t.sum(t.mul(s_err, s_err)), cfg_.state_loss_w));

  // KL chain: q_{-1} = N(0, I)
  Var mu_prev = t.concat_rows(t.constant(Mat::Zero(1, m)), t.slice_rows(mu, 0, H));
  Var ls_prev = t.concat_rows(t.constant(Mat::Zero(1, m)), t.slice_rows(ls, 0, H));
  Var dls = t.sub(ls, ls_prev);
  Var var_ratio = t.exp(t.scale(dls, 2.0));  // sigma_t^2 / sigma_{t-1}^2
  Var dmu = t.sub(mu, mu_prev);
  Var quad = t.mul(t.mul(dmu, dmu), t.exp(t.scale(ls_prev, -2.0)));
  Var kl_terms = t.add_const(
      t.add(t.add(t.scale(dls, -2.0), var_ratio), quad), -1.0);
  Var kl = t.scale(t.sum(kl_terms), 0.5);

  return t.add(recon, t.scale(kl, cfg_.kl_weight));
}

UpdateDiag VaribadModel::vae_update(const std::vector<const Episode*>& episodes,
                                    Adam& vae_opt, RandomStream& noise_rng) {
  Tape tape;
  BoundParams bound = bind(tape, params_, true);
  Var total;
  for (const Episode* ep : episodes) {
    Mat eps(ep->length() + 1, cfg_.latent);
    for (long i = 0; i < eps.size(); ++i) eps.data()[i] = noise_rng.normal();
    Var l = vae_loss(tape, bound, ep->traj, eps);
    total = total.valid() ? tape.add(total, l) : l;
  }
  total = tape.scale(total, 1.0 / static_cast<double>(episodes.size()));
  UpdateDiag diag;
  diag.loss = tape.scalar_value(total);
  if (!std::isfinite(diag.loss)) throw std::runtime_error("diverged");
  tape.backward(total);
  GradSet grads = extract_grads(tape, params_, bound);
  diag.grad_norm = global_norm(grads);
  clip_global_norm(grads, cfg_.vae_grad_clip);
  vae_opt.step(params_, grads);
  if (!params_.all_finite()) throw std::runtime_error("diverged");
  diag.param_norm = params_.norm();
  return diag;
}

UpdateDiag varibad_meta_update(VaribadModel& model, Adam& policy_opt,
                               Adam& vae_opt, const TaskSpace& space,
                               int trials_per_batch, const PGConfig& cfg,
                               RandomStream& task_rng, RandomStream& rollout_rng,
                               RandomStream& update_rng, long* frames_used) {
  RolloutBatch batch;
  auto actor = model.make_actor();
  for (int i = 0; i < trials_per_batch; ++i) {
    Task task = sample_task(space, task_rng);
    batch.trials.push_back(run_trial(*actor, task,
                                     model.config().episodes_per_trial, rollout_rng));
  }
  if (frames_used) *frames_used += batch.frames();

  UpdateDiag diag = ppo_update(model, policy_opt, batch, cfg, update_rng);

  // VAE pass on a subset of the freshly collected trajectories
  auto eps = batch.all_episodes();
  std::vector<const Episode*> vae_eps;
  const int n = std::min<int>(model.config().vae_batch, static_cast<int>(eps.size()));
  for (int i = 0; i < n; ++i) {
    size_t pick = static_cast<size_t>(update_rng.uniform_int(static_cast<int>(eps.size())));
    vae_eps.push_back(eps[pick]);
  }
  UpdateDiag vd = model.vae_update(vae_eps, vae_opt, update_rng);
  diag.loss += vd.loss;
  return diag;
}

}  // namespace metacon
