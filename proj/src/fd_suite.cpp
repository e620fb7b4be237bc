#include "metacon/fd_suite.hpp"

#include "metacon/models.hpp"
#include "metacon/rl2.hpp"
#include "metacon/varibad.hpp"

namespace metacon {

namespace {

Mat random_mat(int r, int c, RandomStream& rng, double scale = 1.0) {
  Mat m(r, c);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// synthetic episode with bounded values; no environment involved
Episode fake_episode(int obs_dim, int act_dim, int H, RandomStream& rng) {
  Episode e;
  e.task = Task{Family::NavDense, 0.0, std::nullopt};
  e.traj.obs = random_mat(H, obs_dim, rng, 0.5);
  e.traj.actions = random_mat(H, act_dim, rng, 0.3);
  e.traj.rewards = random_mat(H, 1, rng, 0.5).col(0);
  e.traj.dones.assign(static_cast<size_t>(H), 0);
  e.traj.dones.back() = 1;
  e.traj.final_obs = random_mat(1, obs_dim, rng, 0.5).row(0).transpose();
  e.logps = random_mat(H, 1, rng, 0.05).col(0);
  e.values = random_mat(H, 1, rng, 0.3).col(0);
  return e;
}

Trial fake_trial(int obs_dim, int act_dim, int H, int n_eps, RandomStream& rng) {
  Trial t;
  for (int i = 0; i < n_eps; ++i)
    t.episodes.push_back(fake_episode(obs_dim, act_dim, H, rng));
  return t;
}

// PPO-style loss over the model's build_eval with frozen targets
LossBuilder ppo_loss_builder(PGModel& model, const std::vector<const Trial*>& trials,
                             RandomStream& rng, bool with_value, bool with_entropy) {
  const long n = flatten_size(trials);
  Mat adv = random_mat(static_cast<int>(n), 1, rng);
  Mat old_logp = flatten_step_major(
      trials, [](const Episode& e, int s) { return e.logps(s); });
  Mat ret = random_mat(static_cast<int>(n), 1, rng);
  return [&model, trials, adv, old_logp, ret, with_value,
          with_entropy](Tape& t, const BoundParams& b) -> Var {
    SeqEval ev = model.build_eval(t, b, trials);
    Var ratio = t.exp(t.sub(ev.logp, t.constant(old_logp)));
    Var clipped = t.clamp(ratio, 0.8, 1.2);
    Var adv_c = t.constant(adv);
    Var loss = t.scale(
        t.mean(t.cmin(t.mul(ratio, adv_c), t.mul(clipped, adv_c))), -1.0);
    if (with_value && ev.value.valid()) {
      Var vdiff = t.sub(ev.value, t.constant(ret));
      loss = t.add(loss, t.scale(t.mean(t.mul(vdiff, vdiff)), 0.5));
    }
    if (with_entropy) loss = t.sub(loss, t.scale(ev.entropy, 0.01));
    return loss;
  };
}

}  // namespace

std::vector<FdCase> run_fd_suite(uint64_t seed) {
  std::vector<FdCase> cases;
  RandomStream rng(seed);

  {
    // 1/2 ||Wx - y||^2, a polynomial sanity anchor
    ParamSet p;
    p.add("w", random_mat(3, 4, rng));
    Mat x = random_mat(1, 3, rng);
    Mat y = random_mat(1, 4, rng);
    LossBuilder quad = [x, y](Tape& t, const BoundParams& b) {
      Var d = t.sub(t.matmul(t.constant(x), b.at("w")), t.constant(y));
      return t.scale(t.sum(t.mul(d, d)), 0.5);
    };
    cases.push_back({"quadratic", fd_check(p, quad).max_rel_err, 1e-8});
  }

  {
    MlpPolicyConfig mc;
    mc.hidden = {8, 8};
    mc.value_head = true;
    MlpPolicyModel model(3, 2, mc, rng);
    std::vector<Trial> trials{fake_trial(3, 2, 6, 1, rng),
                              fake_trial(3, 2, 6, 1, rng)};
    std::vector<const Trial*> tp{&trials[0], &trials[1]};

    LossBuilder pg = [&model, tp](Tape& t, const BoundParams& b) {
      SeqEval ev = model.build_eval(t, b, tp);
      Mat adv = Mat::Zero(12, 1);
      for (int i = 0; i < 12; ++i) adv(i, 0) = 0.1 * (i - 6);
      return t.mean(t.mul(ev.logp, t.constant(adv)));
    };
    cases.push_back({"mlp_pg_surrogate", fd_check(model.params(), pg).max_rel_err, 1e-4});
    cases.push_back({"mlp_ppo_clipped",
                     fd_check(model.params(),
                              ppo_loss_builder(model, tp, rng, false, true))
                         .max_rel_err,
                     1e-4});

    LossBuilder vloss = [&model, tp](Tape& t, const BoundParams& b) {
      SeqEval ev = model.build_eval(t, b, tp);
      Var d = t.add_const(ev.value, -0.3);
      return t.mean(t.mul(d, d));
    };
    cases.push_back({"mlp_value_loss", fd_check(model.params(), vloss).max_rel_err, 1e-4});
  }

  {
    // the spec's miniature recurrent instance: 2 episodes x 5 steps, hidden 4
    Rl2Config rc;
    rc.hidden = 4;
    rc.head_hidden = {4};
    Rl2Model model(2, 1, rc, rng);
    std::vector<Trial> trials{fake_trial(2, 1, 5, 2, rng)};
    std::vector<const Trial*> tp{&trials[0]};
    cases.push_back({"rl2_unrolled_surrogate",
                     fd_check(model.params(),
                              ppo_loss_builder(model, tp, rng, true, true))
                         .max_rel_err,
                     1e-4});
  }

  {
    VaribadConfig vc;
    vc.latent = 2;
    vc.enc_hidden = 4;
    vc.dec_hidden = {4};
    vc.pi_hidden = {4};
    vc.kl_weight = 0.2;
    VaribadModel model(2, 2, vc, rng);
    Episode ep = fake_episode(2, 2, 6, rng);
    Mat eps = random_mat(7, 2, rng);
    LossBuilder elbo = [&model, ep, eps](Tape& t, const BoundParams& b) {
      return model.vae_loss(t, b, ep.traj, eps);
    };
    cases.push_back({"varibad_elbo", fd_check(model.params(), elbo).max_rel_err, 1e-4});

    ep.beliefs = random_mat(6, 4, rng, 0.3);
    Trial trial;
    trial.episodes.push_back(ep);
    std::vector<const Trial*> tp{&trial};
    cases.push_back({"varibad_policy_value",
                     fd_check(model.params(),
                              ppo_loss_builder(model, tp, rng, true, true))
                         .max_rel_err,
                     1e-4});
  }

  return cases;
}

}  // namespace metacon
