#include "metacon/agents.hpp"

namespace metacon {

void save_adam(Checkpoint& c, const std::string& key, const Adam& a) {
  c.ints[key + ".t"] = a.t;
  if (a.m.size() > 0) {
    c.sets[key + ".m"] = a.m;
    c.sets[key + ".v"] = a.v;
  }
}

void load_adam(const Checkpoint& c, const std::string& key, Adam& a) {
  a.t = c.ints.count(key + ".t") ? c.ints.at(key + ".t") : 0;
  if (c.sets.count(key + ".m")) {
    a.m = c.sets.at(key + ".m");
    a.v = c.sets.at(key + ".v");
  } else {
    a.m = GradSet{};
    a.v = GradSet{};
  }
}

namespace {

class ExpertAgent : public Agent {
 public:
  ExpertAgent(const EnvSpec& spec, const BackboneConfig& cfg, RandomStream& init)
      : cfg_(cfg),
        model_(spec.obs_dim, spec.act_dim, cfg.mlp, init),
        opt_(cfg.pg.learning_rate, {}),
        horizon_(spec.horizon) {}

  std::string algo() const override { return "expert"; }
  PGModel& model() override { return model_; }

  UpdateDiag meta_iteration(const TaskSpace&, Streams&, long*) override {
    throw std::runtime_error("expert has no meta-training loop");
  }

  long meta_iteration_frames() const override {
    throw std::runtime_error("expert has no meta-training loop");
  }
  long adapt_cycle_frames() const override {
    return static_cast<long>(cfg_.ga_batch_episodes) * horizon_;
  }

  CycleResult adapt_cycle(const Task& task, bool do_update, Streams& s,
                          long* frames) override {
    CycleResult r;
    auto actor = model_.make_actor();
    r.batch = collect(*actor, task,
                      static_cast<long>(cfg_.ga_batch_episodes) * horizon_, 1,
                      s.rollout);
    if (frames) *frames += r.batch.frames();
    if (do_update) {
      r.diag = ppo_update(model_, opt_, r.batch, cfg_.pg, s.update);
      r.updated = true;
    }
    return r;
  }

  double evaluate_on(const Task& task, int n_episodes, RandomStream& rng) override {
    auto actor = model_.make_actor();
    return evaluate(*actor, task, n_episodes, rng);
  }

  double meta_evaluate(const TaskSpace&, int, RandomStream&) override {
    throw std::runtime_error("expert has no meta evaluation");
  }

  void set_action_mask(const Eigen::RowVectorXd& mask) override {
    model_.set_action_mask(mask);
  }

  void reset_optimizers() override { opt_ = Adam(cfg_.pg.learning_rate, {}); }

  void save_state(Checkpoint& c) const override {
    c.algo = "expert";
    c.sets["params"] = model_.params();
    save_adam(c, "opt", opt_);
  }
  void load_state(const Checkpoint& c) override {
    if (!model_.params().congruent(c.sets.at("params")))
      throw std::runtime_error("checkpoint shape mismatch for expert");
    model_.params() = c.sets.at("params");
    load_adam(c, "opt", opt_);
  }

 private:
  BackboneConfig cfg_;
  MlpPolicyModel model_;
  Adam opt_;
  int horizon_;
};

class MamlAgent : public Agent {
 public:
  MamlAgent(const EnvSpec& spec, const BackboneConfig& cfg, RandomStream& init)
      : cfg_(cfg),
        model_(spec.obs_dim, spec.act_dim, no_value_head(cfg.mlp), init),
        outer_opt_(cfg.maml.outer_lr, {}),
        horizon_(spec.horizon) {}

  std::string algo() const override { return "maml"; }
  PGModel& model() override { return model_; }

  UpdateDiag meta_iteration(const TaskSpace& space, Streams& s, long* frames) override {
    return maml_outer_update(model_, outer_opt_, space, cfg_.maml, s.task,
                             s.rollout, frames);
  }

  long meta_iteration_frames() const override {
    return static_cast<long>(cfg_.maml.outer_batch) *
           (cfg_.maml.inner_steps + 1) * cfg_.maml.inner_batch * horizon_;
  }
  long adapt_cycle_frames() const override {
    return static_cast<long>(cfg_.maml.inner_batch) * horizon_;
  }

  // gradient adaptation: repeated vanilla policy-gradient steps on the task
  CycleResult adapt_cycle(const Task& task, bool do_update, Streams& s,
                          long* frames) override {
    if (!do_update)
      throw std::runtime_error("default mode undefined for gradient-based");
    CycleResult r;
    auto actor = model_.make_actor();
    r.batch = collect(*actor, task,
                      static_cast<long>(cfg_.maml.inner_batch) * horizon_, 1,
                      s.rollout);
    if (frames) *frames += r.batch.frames();
    r.diag = vanilla_pg_update(model_, r.batch, cfg_.maml.inner_lr,
                               cfg_.maml.discount);
    r.updated = true;
    return r;
  }

  double evaluate_on(const Task& task, int n_episodes, RandomStream& rng) override {
    auto actor = model_.make_actor();
    return evaluate(*actor, task, n_episodes, rng);
  }

  // adapt-then-evaluate: inner gradient steps on a copy, from the eval stream
  double meta_evaluate(const TaskSpace& space, int n_tasks, RandomStream& rng) override {
    const ParamSet theta = model_.params();
    double acc = 0.0;
    for (int i = 0; i < n_tasks; ++i) {
      Task task = sample_task(space, rng);
      maml_inner_adapt(model_, theta, task, cfg_.maml.inner_steps,
                       cfg_.maml.inner_lr, cfg_.maml, rng);
      auto actor = model_.make_actor();
      acc += evaluate(*actor, task, 2, rng);
    }
    model_.params() = theta;
    return acc / n_tasks;
  }

  void set_action_mask(const Eigen::RowVectorXd& mask) override {
    model_.set_action_mask(mask);
  }

  void reset_optimizers() override { outer_opt_ = Adam(cfg_.maml.outer_lr, {}); }

  void save_state(Checkpoint& c) const override {
    c.algo = "maml";
    c.sets["params"] = model_.params();
    save_adam(c, "opt", outer_opt_);
  }
  void load_state(const Checkpoint& c) override {
    if (!model_.params().congruent(c.sets.at("params")))
      throw std::runtime_error("checkpoint shape mismatch for maml");
    model_.params() = c.sets.at("params");
    load_adam(c, "opt", outer_opt_);
  }

 private:
  static MlpPolicyConfig no_value_head(MlpPolicyConfig c) {
    c.value_head = false;
    return c;
  }

  BackboneConfig cfg_;
  MlpPolicyModel model_;
  Adam outer_opt_;
  int horizon_;
};

class Rl2Agent : public Agent {
 public:
  Rl2Agent(const EnvSpec& spec, const BackboneConfig& cfg, RandomStream& init)
      : cfg_(cfg),
        model_(spec.obs_dim, spec.act_dim, cfg.rl2, init),
        opt_(cfg.pg.learning_rate, {}),
        horizon_(spec.horizon) {}

  std::string algo() const override { return "rl2"; }
  PGModel& model() override { return model_; }

  UpdateDiag meta_iteration(const TaskSpace& space, Streams& s, long* frames) override {
    return rl2_meta_update(model_, opt_, space, cfg_.meta_trials_per_batch,
                           cfg_.pg, s.task, s.rollout, s.update, frames);
  }

  long meta_iteration_frames() const override {
    return static_cast<long>(cfg_.meta_trials_per_batch) *
           model_.config().episodes_per_trial * horizon_;
  }
  long adapt_cycle_frames() const override {
    return static_cast<long>(cfg_.ga_batch_episodes) * horizon_;
  }

  CycleResult adapt_cycle(const Task& task, bool do_update, Streams& s,
                          long* frames) override {
    CycleResult r;
    auto actor = model_.make_actor();
    r.batch = collect(*actor, task,
                      static_cast<long>(cfg_.ga_batch_episodes) * horizon_,
                      model_.config().episodes_per_trial, s.rollout);
    if (frames) *frames += r.batch.frames();
    if (do_update) {
      r.diag = ppo_update(model_, opt_, r.batch, cfg_.pg, s.update);
      r.updated = true;
    }
    return r;
  }

  double evaluate_on(const Task& task, int n_episodes, RandomStream& rng) override {
    auto actor = model_.make_actor();
    return evaluate(*actor, task, n_episodes, rng);
  }

  double meta_evaluate(const TaskSpace& space, int n_tasks, RandomStream& rng) override {
    double acc = 0.0;
    for (int i = 0; i < n_tasks; ++i) {
      Task task = sample_task(space, rng);
      auto actor = model_.make_actor();
      acc += evaluate(*actor, task, model_.config().episodes_per_trial, rng);
    }
    return acc / n_tasks;
  }

  void set_action_mask(const Eigen::RowVectorXd& mask) override {
    model_.set_action_mask(mask);
  }

  void reset_optimizers() override { opt_ = Adam(cfg_.pg.learning_rate, {}); }

  void save_state(Checkpoint& c) const override {
    c.algo = "rl2";
    c.sets["params"] = model_.params();
    save_adam(c, "opt", opt_);
  }
  void load_state(const Checkpoint& c) override {
    if (!model_.params().congruent(c.sets.at("params")))
      throw std::runtime_error("checkpoint shape mismatch for rl2");
    model_.params() = c.sets.at("params");
    load_adam(c, "opt", opt_);
  }

 private:
  BackboneConfig cfg_;
  Rl2Model model_;
  Adam opt_;
  int horizon_;
};

class VaribadAgent : public Agent {
 public:
  VaribadAgent(const EnvSpec& spec, const BackboneConfig& cfg, RandomStream& init)
      : cfg_(tuned(cfg, spec)),
        model_(spec.obs_dim, spec.act_dim, cfg_.varibad, init),
        policy_opt_(cfg_.pg.learning_rate, model_.policy_param_names()),
        vae_opt_(cfg_.varibad.vae_lr, model_.vae_param_names()),
        horizon_(spec.horizon) {}

  std::string algo() const override { return "varibad"; }
  PGModel& model() override { return model_; }

  UpdateDiag meta_iteration(const TaskSpace& space, Streams& s, long* frames) override {
    return varibad_meta_update(model_, policy_opt_, vae_opt_, space,
                               cfg_.meta_trials_per_batch, cfg_.pg, s.task,
                               s.rollout, s.update, frames);
  }

  long meta_iteration_frames() const override {
    return static_cast<long>(cfg_.meta_trials_per_batch) *
           model_.config().episodes_per_trial * horizon_;
  }
  long adapt_cycle_frames() const override {
    return static_cast<long>(cfg_.ga_batch_episodes) * horizon_;
  }

  CycleResult adapt_cycle(const Task& task, bool do_update, Streams& s,
                          long* frames) override {
    CycleResult r;
    auto actor = model_.make_actor();
    r.batch = collect(*actor, task,
                      static_cast<long>(cfg_.ga_batch_episodes) * horizon_,
                      model_.config().episodes_per_trial, s.rollout);
    if (frames) *frames += r.batch.frames();
    if (do_update) {
      r.diag = ppo_update(model_, policy_opt_, r.batch, cfg_.pg, s.update);
      UpdateDiag vd = model_.vae_update(r.batch.all_episodes(), vae_opt_, s.update);
      r.diag.loss += vd.loss;
      r.updated = true;
    }
    return r;
  }

  double evaluate_on(const Task& task, int n_episodes, RandomStream& rng) override {
    auto actor = model_.make_actor();
    return evaluate(*actor, task, n_episodes, rng);
  }

  double meta_evaluate(const TaskSpace& space, int n_tasks, RandomStream& rng) override {
    double acc = 0.0;
    for (int i = 0; i < n_tasks; ++i) {
      Task task = sample_task(space, rng);
      auto actor = model_.make_actor();
      acc += evaluate(*actor, task, model_.config().episodes_per_trial, rng);
    }
    return acc / n_tasks;
  }

  void set_action_mask(const Eigen::RowVectorXd& mask) override {
    model_.set_action_mask(mask);
  }

  void reset_optimizers() override {
    policy_opt_ = Adam(cfg_.pg.learning_rate, model_.policy_param_names());
    vae_opt_ = Adam(cfg_.varibad.vae_lr, model_.vae_param_names());
  }

  void save_state(Checkpoint& c) const override {
    c.algo = "varibad";
    c.sets["params"] = model_.params();
    save_adam(c, "opt", policy_opt_);
    save_adam(c, "vae_opt", vae_opt_);
  }
  void load_state(const Checkpoint& c) override {
    if (!model_.params().congruent(c.sets.at("params")))
      throw std::runtime_error("checkpoint shape mismatch for varibad");
    model_.params() = c.sets.at("params");
    load_adam(c, "opt", policy_opt_);
    load_adam(c, "vae_opt", vae_opt_);
  }

 private:
  // latent dim 2 for navigation; 5 for the dash families unless overridden
  static BackboneConfig tuned(BackboneConfig cfg, const EnvSpec& spec) {
    if (cfg.varibad.latent == 0)
      cfg.varibad.latent =
          (spec.family == Family::NavDense || spec.family == Family::NavSparse) ? 2 : 5;
    return cfg;
  }

  BackboneConfig cfg_;
  VaribadModel model_;
  Adam policy_opt_;
  Adam vae_opt_;
  int horizon_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const std::string& algo, const EnvSpec& spec,
                                  const BackboneConfig& cfg,
                                  RandomStream& init_rng) {
  if (algo == "expert") return std::make_unique<ExpertAgent>(spec, cfg, init_rng);
  if (algo == "maml") return std::make_unique<MamlAgent>(spec, cfg, init_rng);
  if (algo == "rl2") return std::make_unique<Rl2Agent>(spec, cfg, init_rng);
  if (algo == "varibad") return std::make_unique<VaribadAgent>(spec, cfg, init_rng);
  throw std::runtime_error("unknown algorithm '" + algo + "'");
}

std::unique_ptr<Agent> agent_from_checkpoint(const Checkpoint& c,
                                             const EnvSpec& spec,
                                             const BackboneConfig& cfg) {
  RandomStream dummy(1);
  auto agent = make_agent(c.algo, spec, cfg, dummy);
  agent->load_state(c);
  return agent;
}

}  // namespace metacon
