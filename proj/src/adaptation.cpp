#include "metacon/adaptation.hpp"

#include <sstream>

namespace metacon {

std::string mode_key(AdaptMode m) {
  switch (m) {
    case AdaptMode::Default: return "default";
    case AdaptMode::GA: return "ga";
    case AdaptMode::CMT: return "cmt";
    case AdaptMode::ScratchExpert: return "scratch";
    case AdaptMode::ScratchMeta: return "scratch_meta";
  }
  throw std::runtime_error("bad mode");
}

AdaptMode mode_from_key(const std::string& k) {
  if (k == "default") return AdaptMode::Default;
  if (k == "ga") return AdaptMode::GA;
  if (k == "cmt") return AdaptMode::CMT;
  if (k == "scratch") return AdaptMode::ScratchExpert;
  if (k == "scratch_meta") return AdaptMode::ScratchMeta;
  throw std::runtime_error("unknown mode '" + k + "'");
}

namespace {
long cadence_of(const LoopConfig& cfg) {
  return std::max<long>(1, static_cast<long>(static_cast<double>(cfg.frame_budget) *
                                             cfg.eval_fraction));
}
}  // namespace

AdaptationRun run_single_task(Agent& agent, const Task& task, bool do_updates,
                              const LoopConfig& cfg, const SeedTree& run_tree,
                              const SeedTree& eval_tree) {
  RandomStream task_rng = run_tree.child("task").stream();
  RandomStream rollout_rng = run_tree.child("rollout").stream();
  RandomStream update_rng = run_tree.child("update").stream();
  RandomStream eval_rng = eval_tree.child("eval").stream();
  Streams streams{task_rng, rollout_rng, update_rng};

  AdaptationRun run;
  const long cadence = cadence_of(cfg);
  long next_eval = 0;
  long update_idx = 0;

  run.curve.add(0, agent.evaluate_on(task, cfg.eval_episodes, eval_rng));
  next_eval = cadence;

  while (run.frames_used + agent.adapt_cycle_frames() <= cfg.frame_budget) {
    CycleResult r = agent.adapt_cycle(task, do_updates, streams, &run.frames_used);
    if (r.updated)
      run.diags.push_back({update_idx++, r.diag.loss, r.diag.grad_norm,
                           r.diag.param_norm});
    if (cfg.dump_trajs)
      for (auto& trial : r.batch.trials)
        for (auto& ep : trial.episodes) run.dumps.push_back(std::move(ep));
    if (run.frames_used >= next_eval) {
      run.curve.add(run.frames_used,
                    agent.evaluate_on(task, cfg.eval_episodes, eval_rng));
      while (next_eval <= run.frames_used) next_eval += cadence;
    }
  }
  if (run.curve.final_frame() < run.frames_used)
    run.curve.add(run.frames_used,
                  agent.evaluate_on(task, cfg.eval_episodes, eval_rng));
  return run;
}

AdaptationRun run_meta_loop(Agent& agent, const TaskSpace& space,
                            const LoopConfig& cfg, const SeedTree& run_tree,
                            const SeedTree& eval_tree, MetaLoopState* state,
                            long stop_after_frames) {
  RandomStream task_rng = run_tree.child("task").stream();
  RandomStream rollout_rng = run_tree.child("rollout").stream();
  RandomStream update_rng = run_tree.child("update").stream();
  RandomStream eval_rng = eval_tree.child("eval").stream();

  AdaptationRun run;
  long next_eval = 0;
  const long cadence = cadence_of(cfg);

  if (state && state->valid) {
    task_rng.set_state(state->task_state);
    rollout_rng.set_state(state->rollout_state);
    update_rng.set_state(state->update_state);
    eval_rng.set_state(state->eval_state);
    run.frames_used = state->frames;
    run.curve = state->curve;
    run.best_eval = state->best_eval;
    run.best_params = state->best_params;
    while (next_eval <= run.frames_used) next_eval += cadence;
  }
  Streams streams{task_rng, rollout_rng, update_rng};

  auto probe = [&]() {
    const double v = agent.meta_evaluate(space, cfg.eval_tasks, eval_rng);
    run.curve.add(run.frames_used, v);
    if (v > run.best_eval) {
      run.best_eval = v;
      run.best_params = agent.params();
    }
  };

  if (!(state && state->valid)) {
    probe();  // frame-0 point: the randomly initialized backbone
    next_eval = cadence;
  }

  long update_idx = static_cast<long>(run.diags.size());
  while (run.frames_used + agent.meta_iteration_frames() <= cfg.frame_budget) {
    UpdateDiag d = agent.meta_iteration(space, streams, &run.frames_used);
    run.diags.push_back({update_idx++, d.loss, d.grad_norm, d.param_norm});
    if (run.frames_used >= next_eval) {
      probe();
      while (next_eval <= run.frames_used) next_eval += cadence;
    }
    if (stop_after_frames > 0 && run.frames_used >= stop_after_frames &&
        run.frames_used < cfg.frame_budget)
      break;
  }
  if (run.curve.final_frame() < run.frames_used) probe();

  if (state) {
    state->valid = true;
    state->frames = run.frames_used;
    state->curve = run.curve;
    state->best_eval = run.best_eval;
    state->best_params = run.best_params;
    state->task_state = task_rng.state();
    state->rollout_state = rollout_rng.state();
    state->update_state = update_rng.state();
    state->eval_state = eval_rng.state();
  }
  return run;
}

void curve_to_blob(const LearningCurve& c, std::vector<uint8_t>& blob) {
  std::ostringstream os;
  os << c.run_id << "\n" << c.seed << "\n";
  os.precision(17);
  for (const auto& p : c.points) os << p.frame << " " << p.mean_return << "\n";
  const std::string s = os.str();
  blob.assign(s.begin(), s.end());
}

LearningCurve curve_from_blob(const std::vector<uint8_t>& blob) {
  std::istringstream is(std::string(blob.begin(), blob.end()));
  LearningCurve c;
  std::getline(is, c.run_id);
  std::string seed_line;
  std::getline(is, seed_line);
  c.seed = seed_line.empty() ? 0 : static_cast<uint32_t>(std::stoul(seed_line));
  long frame;
  double v;
  while (is >> frame >> v) c.points.push_back({frame, v});
  return c;
}

}  // namespace metacon
