#include "metacon/rollout.hpp"

namespace metacon {

Episode run_episode(Actor& actor, Env& env, RandomStream& rng,
                    bool deterministic) {
  const EnvSpec& spec = env.spec();
  const int H = spec.horizon;
  Episode ep;
  ep.task = env.task();
  ep.traj.task_id = env.task().id();
  ep.traj.obs.resize(H, spec.obs_dim);
  ep.traj.actions.resize(H, spec.act_dim);
  ep.traj.rewards.resize(H);
  ep.traj.dones.assign(static_cast<size_t>(H), 0);
  ep.logps.resize(H);
  ep.values.resize(H);

  actor.begin_episode();
  Eigen::VectorXd obs = env.reset();
  bool has_belief = actor.belief().size() > 0;
  if (has_belief) ep.beliefs.resize(H, actor.belief().cols());

  for (int t = 0; t < H; ++t) {
    ep.traj.obs.row(t) = obs.transpose();
    if (has_belief) ep.beliefs.row(t) = actor.belief();
    double logp = 0.0, value = 0.0;
    Eigen::RowVectorXd a = actor.act(obs, rng, logp, value, deterministic);
    StepResult sr = env.step(a.transpose());
    ep.traj.actions.row(t) = a;
    ep.traj.rewards(t) = sr.reward;
    ep.traj.dones[static_cast<size_t>(t)] = sr.done ? 1 : 0;
    ep.logps(t) = logp;
    ep.values(t) = value;
    actor.observe(a, sr.reward, sr.next_obs, sr.done);
    obs = sr.next_obs;
  }
  ep.traj.final_obs = obs;
  return ep;
}

Trial run_trial(Actor& actor, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic) {
  Trial trial;
  trial.episodes.reserve(static_cast<size_t>(n_episodes));
  actor.begin_trial(task);
  Env env(task);
  for (int i = 0; i < n_episodes; ++i)
    trial.episodes.push_back(run_episode(actor, env, rng, deterministic));
  return trial;
}

RolloutBatch collect(Actor& actor, const Task& task, long n_frames,
                     int episodes_per_trial, RandomStream& rng) {
  const int H = effective_spec(task).horizon;
  long episodes = (n_frames + H - 1) / H;
  RolloutBatch batch;
  while (episodes > 0) {
    int n = static_cast<int>(std::min<long>(episodes, episodes_per_trial));
    batch.trials.push_back(run_trial(actor, task, n, rng));
    episodes -= n;
  }
  return batch;
}

double evaluate(Actor& actor, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic) {
  Trial t = run_trial(actor, task, n_episodes, rng, deterministic);
  double sum = 0.0;
  for (const auto& e : t.episodes) sum += e.ret();
  return sum / n_episodes;
}

}  // namespace metacon
