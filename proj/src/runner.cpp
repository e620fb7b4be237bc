#include "metacon/runner.hpp"

#include "metacon/heatmap.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace metacon {

long ExperimentConfig::meta_budget(const std::string& algo) const {
  if (algo == "maml" && meta_train_frames_maml > 0) return meta_train_frames_maml;
  return meta_train_frames;
}

long ExperimentConfig::multi_budget(const std::string& algo) const {
  if (algo == "maml" && multi_task_frames_maml > 0) return multi_task_frames_maml;
  return multi_task_frames;
}

FamilyBudgets default_budgets(Family f) {
  // paper budgets (frames) divided by 200
  switch (f) {
    case Family::NavDense:
      return {25000, 50000, 10000, 25000, 50000};
    case Family::NavSparse:
      return {100000, 100000, 25000, 100000, 100000};
    case Family::DashVel:
    case Family::DashDir:
      return {50000, 50000, 10000, 50000, 50000};
    case Family::DashVelB:
    case Family::DashDirB:
      return {100000, 100000, 50000, 100000, 100000};
  }
  throw std::runtime_error("bad family");
}

BackboneConfig backbone_from_config(const Config& c) {
  BackboneConfig b;
  b.pg.discount = c.real("pg.discount", b.pg.discount);
  b.pg.gae_lambda = c.real("pg.gae_lambda", b.pg.gae_lambda);
  b.pg.learning_rate = c.real("pg.learning_rate", b.pg.learning_rate);
  b.pg.ppo_clip = c.real("pg.ppo_clip", b.pg.ppo_clip);
  b.pg.epochs_per_batch = static_cast<int>(c.integer("pg.epochs_per_batch", b.pg.epochs_per_batch));
  b.pg.minibatch_count = static_cast<int>(c.integer("pg.minibatch_count", b.pg.minibatch_count));
  b.pg.entropy_coef = c.real("pg.entropy_coef", b.pg.entropy_coef);
  b.pg.value_coef = c.real("pg.value_coef", b.pg.value_coef);
  b.pg.max_grad_norm = c.real("pg.max_grad_norm", b.pg.max_grad_norm);

  b.maml.inner_lr = c.real("maml.inner_lr", b.maml.inner_lr);
  b.maml.inner_batch = static_cast<int>(c.integer("maml.inner_batch", b.maml.inner_batch));
  b.maml.outer_batch = static_cast<int>(c.integer("maml.outer_batch", b.maml.outer_batch));
  b.maml.inner_steps = static_cast<int>(c.integer("maml.inner_steps", b.maml.inner_steps));
  b.maml.outer_lr = c.real("maml.outer_lr", b.maml.outer_lr);
  b.maml.discount = c.real("pg.discount", b.maml.discount);

  b.rl2.hidden = static_cast<int>(c.integer("rl2.hidden", b.rl2.hidden));
  b.rl2.log_std_init = c.real("backbone.log_std_init", b.rl2.log_std_init);
  b.rl2.reset_per_trial = c.boolean("rl2.reset_per_trial", b.rl2.reset_per_trial);
  b.rl2.episodes_per_trial = static_cast<int>(c.integer("rl2.episodes_per_trial", b.rl2.episodes_per_trial));

  b.varibad.latent = static_cast<int>(c.integer("varibad.latent", b.varibad.latent));
  b.varibad.enc_hidden = static_cast<int>(c.integer("varibad.enc_hidden", b.varibad.enc_hidden));
  b.varibad.kl_weight = c.real("varibad.kl_weight", b.varibad.kl_weight);
  b.varibad.reward_loss_w = c.real("varibad.reward_loss_w", b.varibad.reward_loss_w);
  b.varibad.state_loss_w = c.real("varibad.state_loss_w", b.varibad.state_loss_w);
  b.varibad.vae_lr = c.real("varibad.vae_lr", b.varibad.vae_lr);
  b.varibad.vae_batch = static_cast<int>(c.integer("varibad.vae_batch", b.varibad.vae_batch));
  b.varibad.log_std_init = c.real("backbone.log_std_init", b.varibad.log_std_init);
  b.varibad.reset_per_trial = c.boolean("varibad.reset_per_trial", b.varibad.reset_per_trial);
  b.varibad.episodes_per_trial = static_cast<int>(c.integer("varibad.episodes_per_trial", b.varibad.episodes_per_trial));

  b.mlp.log_std_init = c.real("backbone.log_std_init", b.mlp.log_std_init);
  b.ga_batch_episodes = static_cast<int>(c.integer("backbone.ga_batch_episodes", b.ga_batch_episodes));
  b.meta_trials_per_batch = static_cast<int>(c.integer("backbone.meta_trials_per_batch", b.meta_trials_per_batch));
  b.eval_episodes = static_cast<int>(c.integer("eval.episodes", b.eval_episodes));
  b.eval_tasks = static_cast<int>(c.integer("eval.tasks", b.eval_tasks));
  return b;
}

ExperimentConfig experiment_from_config(const Config& c) {
  ExperimentConfig e;
  e.name = c.str("experiment.name", e.name);
  e.family = family_from_key(c.str("experiment.family", "nav_dense"));
  e.test_family = c.has("experiment.test_family")
                      ? family_from_key(c.str("experiment.test_family"))
                      : e.family;
  if (c.has("experiment.algos")) e.algos = c.list("experiment.algos");
  e.train_spaces = c.list("experiment.train_spaces");
  e.test_spaces = c.list("experiment.test_spaces");
  if (c.has("experiment.modes")) e.modes = c.list("experiment.modes");
  e.seeds = static_cast<int>(c.integer("experiment.seeds", e.seeds));
  e.root_seed = static_cast<uint64_t>(c.integer("experiment.root_seed", 1));
  e.out_dir = c.str("experiment.out", e.out_dir);

  const FamilyBudgets d = default_budgets(e.family);
  e.meta_train_frames = c.integer("budgets.meta_train", d.meta_train);
  e.meta_train_frames_maml = c.integer("budgets.meta_train_maml", d.meta_train_maml);
  e.single_task_frames = c.integer("budgets.single_task", d.single_task);
  e.multi_task_frames = c.integer("budgets.multi_task", d.multi_task);
  e.multi_task_frames_maml = c.integer("budgets.multi_task_maml", d.multi_task_maml);

  e.loop.eval_fraction = c.real("eval.fraction", e.loop.eval_fraction);
  e.loop.eval_episodes = static_cast<int>(c.integer("eval.episodes", e.loop.eval_episodes));
  e.loop.eval_tasks = static_cast<int>(c.integer("eval.tasks", e.loop.eval_tasks));
  e.loop.dump_trajs = c.boolean("experiment.dump_trajs", false);

  e.backbone = backbone_from_config(c);
  e.raw = c.dump();
  return e;
}

std::string sanitize_region(const std::string& region) {
  std::string out;
  for (char ch : region) {
    if (ch == '[' || ch == ']' || ch == ' ') continue;
    if (ch == ',' || ch == '=') ch = '_';
    if (ch == '+') ch = 'p';
    if (ch == '-') ch = 'm';
    out.push_back(ch);
  }
  return out;
}

std::string meta_cell(const std::string& algo, const std::string& train) {
  return algo + "__" + sanitize_region(train);
}
std::string adapt_cell(const std::string& algo, const std::string& train,
                       const std::string& test) {
  return algo + "__" + sanitize_region(train) + "__" + sanitize_region(test);
}
std::string expert_cell(const std::string& train, const std::string& test) {
  return "expert__" + sanitize_region(train) + "__" + sanitize_region(test);
}
std::string scratch_meta_cell(const std::string& algo, const std::string& test) {
  return algo + "__meta__" + sanitize_region(test);
}
std::string run_dir(const std::string& out, const std::string& cell,
                    const std::string& mode, int seed) {
  return out + "/" + cell + "/" + mode + "/seed" + std::to_string(seed);
}

void write_run_artifacts(const std::string& dir, const RunMeta& meta,
                         const AdaptationRun& run) {
  fs::create_directories(dir);
  LearningCurve curve = run.curve;
  curve.run_id = meta.algo + "/" + meta.mode + "/" + meta.train_space + "->" +
                 meta.test_space;
  curve.seed = static_cast<uint32_t>(meta.seed);
  write_curve_csv(curve, dir + "/curve.csv");

  {
    std::ofstream diag(dir + "/diag.csv");
    diag << "update_idx,loss,grad_norm,param_norm\n";
    char buf[160];
    for (const auto& d : run.diags) {
      std::snprintf(buf, sizeof(buf), "%ld,%.10g,%.10g,%.10g", d.update_idx,
                    d.loss, d.grad_norm, d.param_norm);
      diag << buf << "\n";
    }
  }

  json j;
  j["algo"] = meta.algo;
  j["mode"] = meta.mode;
  j["train_space"] = meta.train_space;
  j["test_space"] = meta.test_space;
  j["family"] = meta.family;
  j["seed"] = meta.seed;
  j["pair_key"] = meta.pair_key;
  j["frame_budget"] = meta.frame_budget;
  j["frames_used"] = run.frames_used;
  std::ofstream(dir + "/meta.json") << j.dump(2) << "\n";

  if (!run.dumps.empty()) {
    std::ofstream out(dir + "/traj_dump.jsonl");
    for (const auto& ep : run.dumps) {
      json line;
      line["task"] = {{"family", family_key(ep.task.family)},
                      {"param", ep.task.param}};
      json obs = json::array();
      for (long r = 0; r < ep.traj.obs.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < ep.traj.obs.cols(); ++c) row.push_back(ep.traj.obs(r, c));
        obs.push_back(row);
      }
      line["obs"] = obs;
      json acts = json::array();
      for (long r = 0; r < ep.traj.actions.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < ep.traj.actions.cols(); ++c)
          row.push_back(ep.traj.actions(r, c));
        acts.push_back(row);
      }
      line["actions"] = acts;
      json rews = json::array();
      for (long r = 0; r < ep.traj.rewards.size(); ++r)
        rews.push_back(ep.traj.rewards(r));
      line["rewards"] = rews;
      if (ep.beliefs.size() > 0) {
        json bel = json::array();
        for (long r = 0; r < ep.beliefs.rows(); ++r) {
          json row = json::array();
          for (long c = 0; c < ep.beliefs.cols(); ++c) row.push_back(ep.beliefs(r, c));
          bel.push_back(row);
        }
        line["belief"] = bel;
      }
      out << line.dump() << "\n";
    }
  }
}

void WorkerPool::run(std::vector<std::function<void()>> jobs) {
  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  const int n = std::max(1, workers_);
  for (int i = 0; i < n; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (!first_error.empty()) throw std::runtime_error(first_error);
}

int worker_count_from_env(int fallback) {
  if (const char* env = std::getenv("METACON_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return fallback;
}

namespace {

// Cross-embodiment experiments size the networks for the larger embodiment
// and wrap the smaller family's tasks in it.
EnvSpec agent_spec(const ExperimentConfig& cfg) {
  EnvSpec a = spec_for(cfg.family);
  EnvSpec b = spec_for(cfg.test_family);
  return b.obs_dim > a.obs_dim ? b : a;
}

Task wrap_task(const ExperimentConfig& cfg, Task t) {
  const EnvSpec big = agent_spec(cfg);
  if (t.family != big.family) t.pad_to = big.family;
  return t;
}

Eigen::RowVectorXd mask_for(const ExperimentConfig& cfg, Family acting) {
  return action_mask(spec_for(acting), agent_spec(cfg));
}

SeedTree family_tree(const ExperimentConfig& cfg) {
  return SeedTree(cfg.root_seed).child(family_key(cfg.family));
}

bool run_exists(const std::string& dir) {
  return fs::exists(dir + "/curve.csv") && fs::exists(dir + "/meta.json");
}

void save_meta_state(const std::string& dir, const std::string& algo,
                     const Agent& agent, const MetaLoopState& state,
                     long budget) {
  Checkpoint live;
  agent.save_state(live);
  live.ints["frames"] = state.frames;
  live.reals["best_eval"] = state.best_eval;
  if (state.best_params.size() > 0) live.sets["best_params"] = state.best_params;
  auto pack = [&](const char* key, const std::array<uint64_t, 4>& st) {
    std::vector<uint8_t> b(32);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 8; ++j)
        b[static_cast<size_t>(i * 8 + j)] = static_cast<uint8_t>((st[static_cast<size_t>(i)] >> (8 * j)) & 0xff);
    live.blobs[key] = std::move(b);
  };
  pack("rng.task", state.task_state);
  pack("rng.rollout", state.rollout_state);
  pack("rng.update", state.update_state);
  pack("rng.eval", state.eval_state);
  curve_to_blob(state.curve, live.blobs["curve"]);
  live.ints["budget"] = budget;
  live.strs["algo"] = algo;
  save_checkpoint(live, dir + "/state.bin");
}

MetaLoopState load_meta_state(const Checkpoint& c) {
  MetaLoopState s;
  s.valid = true;
  s.frames = c.ints.at("frames");
  s.best_eval = c.reals.at("best_eval");
  if (c.sets.count("best_params")) s.best_params = c.sets.at("best_params");
  auto unpack = [&](const char* key, std::array<uint64_t, 4>& st) {
    const auto& b = c.blobs.at(key);
    for (int i = 0; i < 4; ++i) {
      uint64_t v = 0;
      for (int j = 0; j < 8; ++j)
        v |= static_cast<uint64_t>(b[static_cast<size_t>(i * 8 + j)]) << (8 * j);
      st[static_cast<size_t>(i)] = v;
    }
  };
  unpack("rng.task", s.task_state);
  unpack("rng.rollout", s.rollout_state);
  unpack("rng.update", s.update_state);
  unpack("rng.eval", s.eval_state);
  s.curve = curve_from_blob(c.blobs.at("curve"));
  return s;
}

}  // namespace

Task cell_task(const ExperimentConfig& cfg, const std::string& train_space,
               const std::string& test_space, int seed) {
  TaskSpace space = parse_space(family_key(cfg.test_family) + ":" + test_space);
  RandomStream rng = family_tree(cfg)
                         .child("task")
                         .child(train_space)
                         .child(test_space)
                         .child("seed", seed)
                         .stream();
  return wrap_task(cfg, sample_task(space, rng));
}

void run_meta_train(const ExperimentConfig& cfg, const std::string& algo,
                    const std::string& train_space, int seed, bool resume) {
  const std::string dir =
      run_dir(cfg.out_dir, meta_cell(algo, train_space), "meta_train", seed);
  fs::create_directories(dir);
  SeedTree tree = family_tree(cfg);
  RandomStream init =
      tree.child("init").child(algo).child(train_space).child("seed", seed).stream();
  auto agent = make_agent(algo, agent_spec(cfg), cfg.backbone, init);
  agent->set_action_mask(mask_for(cfg, cfg.family));

  TaskSpace space = parse_space(family_key(cfg.family) + ":" + train_space);
  LoopConfig loop = cfg.loop;
  loop.frame_budget = cfg.meta_budget(algo);

  MetaLoopState state;
  if (resume && fs::exists(dir + "/state.bin")) {
    Checkpoint prev = load_checkpoint(dir + "/state.bin");
    agent->load_state(prev);
    state = load_meta_state(prev);
  }

  SeedTree run_tree = tree.child("meta").child(algo).child(train_space).child("seed", seed);
  SeedTree eval_tree = tree.child("meta_eval").child(train_space).child("seed", seed);
  AdaptationRun run = run_meta_loop(*agent, space, loop, run_tree, eval_tree, &state);

  // deliverable checkpoint: the highest-evaluation snapshot
  Checkpoint best;
  agent->save_state(best);
  best.sets["params"] = run.best_params;
  best.sets.erase("opt.m");
  best.sets.erase("opt.v");
  best.sets.erase("vae_opt.m");
  best.sets.erase("vae_opt.v");
  best.ints.erase("opt.t");
  best.ints.erase("vae_opt.t");
  best.reals["eval_return"] = run.best_eval;
  best.strs["family"] = family_key(agent_spec(cfg).family);
  save_checkpoint(best, dir + "/ckpt.bin");
  save_meta_state(dir, algo, *agent, state, loop.frame_budget);

  RunMeta meta{algo, "meta_train", train_space, train_space,
               family_key(cfg.family), "", seed, loop.frame_budget};
  write_run_artifacts(dir, meta, run);
}

void run_expert(const ExperimentConfig& cfg, const std::string& train_space,
                const std::string& test_space, int seed) {
  const std::string dir =
      run_dir(cfg.out_dir, expert_cell(train_space, test_space), "scratch", seed);
  SeedTree tree = family_tree(cfg);
  RandomStream init = tree.child("init")
                          .child("expert")
                          .child(train_space + "|" + test_space)
                          .child("seed", seed)
                          .stream();
  auto agent = make_agent("expert", agent_spec(cfg), cfg.backbone, init);
  agent->set_action_mask(mask_for(cfg, cfg.test_family));
  Task task = cell_task(cfg, train_space, test_space, seed);

  LoopConfig loop = cfg.loop;
  loop.frame_budget = cfg.single_task_frames;
  SeedTree run_tree =
      tree.child("cell").child("expert").child(train_space).child(test_space).child("seed", seed);
  SeedTree eval_tree =
      tree.child("cell_eval").child(train_space).child(test_space).child("seed", seed);
  AdaptationRun run = run_single_task(*agent, task, true, loop, run_tree, eval_tree);

  RunMeta meta{"expert", "scratch", train_space, test_space,
               family_key(cfg.test_family),
               "task|" + train_space + "|" + test_space, seed, loop.frame_budget};
  write_run_artifacts(dir, meta, run);
}

void run_scratch_meta(const ExperimentConfig& cfg, const std::string& algo,
                      const std::string& test_space, int seed) {
  const std::string dir =
      run_dir(cfg.out_dir, scratch_meta_cell(algo, test_space), "scratch_meta", seed);
  SeedTree tree = family_tree(cfg);
  RandomStream init = tree.child("init")
                          .child(algo)
                          .child("meta_scratch")
                          .child(test_space)
                          .child("seed", seed)
                          .stream();
  auto agent = make_agent(algo, agent_spec(cfg), cfg.backbone, init);
  agent->set_action_mask(mask_for(cfg, cfg.test_family));
  TaskSpace space = parse_space(family_key(cfg.test_family) + ":" + test_space);

  LoopConfig loop = cfg.loop;
  loop.frame_budget = cfg.multi_budget(algo);
  SeedTree run_tree =
      tree.child("meta").child(algo).child("scratch__" + test_space).child("seed", seed);
  SeedTree eval_tree = tree.child("meta_eval").child(test_space).child("seed", seed);
  AdaptationRun run = run_meta_loop(*agent, space, loop, run_tree, eval_tree);

  RunMeta meta{algo, "scratch_meta", test_space, test_space,
               family_key(cfg.test_family), "meta|" + algo + "|" + test_space,
               seed, loop.frame_budget};
  write_run_artifacts(dir, meta, run);
}

void run_adapt_cell(const ExperimentConfig& cfg, const std::string& algo,
                    const std::string& train_space, const std::string& test_space,
                    const std::string& mode, int seed) {
  const AdaptMode m = mode_from_key(mode);
  const std::string dir =
      run_dir(cfg.out_dir, adapt_cell(algo, train_space, test_space), mode, seed);
  const std::string ckpt_path =
      run_dir(cfg.out_dir, meta_cell(algo, train_space), "meta_train", seed) + "/ckpt.bin";
  if (!fs::exists(ckpt_path))
    throw std::runtime_error("missing checkpoint " + ckpt_path);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto agent = agent_from_checkpoint(ckpt, agent_spec(cfg), cfg.backbone);
  agent->set_action_mask(mask_for(cfg, cfg.test_family));
  agent->reset_optimizers();  // fresh optimizer state for test-time adaptation

  SeedTree tree = family_tree(cfg);
  AdaptationRun run;
  RunMeta meta;
  meta.algo = algo;
  meta.mode = mode;
  meta.train_space = train_space;
  meta.test_space = test_space;
  meta.family = family_key(cfg.test_family);
  meta.seed = seed;

  if (m == AdaptMode::CMT) {
    TaskSpace space = parse_space(family_key(cfg.test_family) + ":" + test_space);
    LoopConfig loop = cfg.loop;
    loop.frame_budget = cfg.multi_budget(algo);
    SeedTree run_tree =
        tree.child("cmt").child(algo).child(train_space).child(test_space).child("seed", seed);
    SeedTree eval_tree = tree.child("meta_eval").child(test_space).child("seed", seed);
    run = run_meta_loop(*agent, space, loop, run_tree, eval_tree);
    meta.pair_key = "meta|" + algo + "|" + test_space;
    meta.frame_budget = loop.frame_budget;
  } else if (m == AdaptMode::Default || m == AdaptMode::GA) {
    Task task = cell_task(cfg, train_space, test_space, seed);
    LoopConfig loop = cfg.loop;
    loop.frame_budget = cfg.single_task_frames;
    SeedTree run_tree =
        tree.child("cell").child(algo).child(train_space).child(test_space).child("seed", seed);
    SeedTree eval_tree =
        tree.child("cell_eval").child(train_space).child(test_space).child("seed", seed);
    run = run_single_task(*agent, task, m == AdaptMode::GA, loop, run_tree, eval_tree);
    meta.pair_key = "task|" + train_space + "|" + test_space;
    meta.frame_budget = loop.frame_budget;
  } else {
    throw std::runtime_error("mode '" + mode + "' is not an adaptation cell mode");
  }
  write_run_artifacts(dir, meta, run);
}

namespace {

// MAML has no gradient-free unrolling, so "default" cells do not apply; its
// single-task protocol is the gradient one.
std::vector<std::string> modes_for(const std::string& algo,
                                   const std::vector<std::string>& modes) {
  std::vector<std::string> out;
  for (const auto& m : modes) {
    if (algo == "maml" && m == "default") continue;
    out.push_back(m);
  }
  return out;
}

bool has_single_task_mode(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.modes)
    if (m == "default" || m == "ga") return true;
  return false;
}

bool has_cmt(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.modes)
    if (m == "cmt") return true;
  return false;
}

}  // namespace

GridPlan plan_grid(const ExperimentConfig& cfg) {
  GridPlan p;
  p.meta_train_runs =
      static_cast<int>(cfg.algos.size() * cfg.train_spaces.size()) * cfg.seeds;
  if (has_single_task_mode(cfg))
    p.expert_runs =
        static_cast<int>(cfg.train_spaces.size() * cfg.test_spaces.size()) * cfg.seeds;
  if (has_cmt(cfg))
    p.scratch_meta_runs =
        static_cast<int>(cfg.algos.size() * cfg.test_spaces.size()) * cfg.seeds;
  for (const auto& algo : cfg.algos)
    p.adaptation_cells += static_cast<int>(cfg.train_spaces.size() *
                                           cfg.test_spaces.size() *
                                           modes_for(algo, cfg.modes).size()) *
                          cfg.seeds;
  return p;
}

GridPlan run_grid(const ExperimentConfig& cfg, int workers) {
  fs::create_directories(cfg.out_dir);
  std::ofstream(cfg.out_dir + "/config.ini") << cfg.raw;

  WorkerPool pool(workers);
  std::vector<std::function<void()>> phase1;
  for (const auto& algo : cfg.algos)
    for (const auto& train : cfg.train_spaces)
      for (int s = 0; s < cfg.seeds; ++s) {
        const std::string dir =
            run_dir(cfg.out_dir, meta_cell(algo, train), "meta_train", s);
        if (run_exists(dir)) continue;
        phase1.push_back([=, &cfg]() { run_meta_train(cfg, algo, train, s); });
      }
  if (has_single_task_mode(cfg))
    for (const auto& train : cfg.train_spaces)
      for (const auto& test : cfg.test_spaces)
        for (int s = 0; s < cfg.seeds; ++s) {
          const std::string dir =
              run_dir(cfg.out_dir, expert_cell(train, test), "scratch", s);
          if (run_exists(dir)) continue;
          phase1.push_back([=, &cfg]() { run_expert(cfg, train, test, s); });
        }
  if (has_cmt(cfg))
    for (const auto& algo : cfg.algos)
      for (const auto& test : cfg.test_spaces)
        for (int s = 0; s < cfg.seeds; ++s) {
          const std::string dir =
              run_dir(cfg.out_dir, scratch_meta_cell(algo, test), "scratch_meta", s);
          if (run_exists(dir)) continue;
          phase1.push_back([=, &cfg]() { run_scratch_meta(cfg, algo, test, s); });
        }
  pool.run(std::move(phase1));

  std::vector<std::function<void()>> phase2;
  for (const auto& algo : cfg.algos)
    for (const auto& train : cfg.train_spaces)
      for (const auto& test : cfg.test_spaces)
        for (const auto& mode : modes_for(algo, cfg.modes))
          for (int s = 0; s < cfg.seeds; ++s) {
            const std::string dir =
                run_dir(cfg.out_dir, adapt_cell(algo, train, test), mode, s);
            if (run_exists(dir)) continue;
            phase2.push_back(
                [=, &cfg]() { run_adapt_cell(cfg, algo, train, test, mode, s); });
          }
  pool.run(std::move(phase2));
  return plan_grid(cfg);
}

LoadedRuns load_runs(const std::string& out_dir) {
  LoadedRuns out;
  if (!fs::exists(out_dir)) throw std::runtime_error("no such directory " + out_dir);
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "meta.json") continue;
    std::ifstream in(entry.path());
    json j;
    in >> j;
    const std::string mode = j.at("mode");
    if (mode == "meta_train") continue;
    RunRef r;
    r.algo = j.at("algo");
    r.mode = mode;
    r.train_space = j.at("train_space");
    r.test_space = j.at("test_space");
    r.seed = j.at("seed");
    r.pair_key = j.at("pair_key");
    r.frame_budget = j.at("frame_budget");
    r.curve = read_curve_csv((entry.path().parent_path() / "curve.csv").string());
    if (mode == "scratch" || mode == "scratch_meta") {
      out.scratch.push_back(std::move(r));
    } else {
      out.frame_budget = std::max(out.frame_budget, r.frame_budget);
      out.meta.push_back(std::move(r));
    }
  }
  return out;
}

ConsistencyReport report_from_dir(const std::string& out_dir,
                                  const std::string& csv_path,
                                  bool emit_heatmaps) {
  LoadedRuns runs = load_runs(out_dir);
  ConsistencyReport report =
      build_report(runs.meta, runs.scratch, runs.frame_budget);
  write_report_csv(report, csv_path);

  if (emit_heatmaps) {
    std::set<std::pair<std::string, std::string>> groups;
    std::set<std::string> trains, tests;
    for (const auto& c : report.cells) {
      groups.insert({c.algo, c.mode});
      trains.insert(c.train_space);
      tests.insert(c.test_space);
    }
    std::vector<std::string> rows(trains.begin(), trains.end());
    std::vector<std::string> cols(tests.begin(), tests.end());
    for (const auto& [algo, mode] : groups) {
      for (const char* metric : {"score", "rate"}) {
        std::vector<std::vector<std::optional<double>>> grid(
            rows.size(), std::vector<std::optional<double>>(cols.size()));
        for (const auto& c : report.cells) {
          if (c.algo != algo || c.mode != mode || !c.defined) continue;
          const size_t r = static_cast<size_t>(
              std::find(rows.begin(), rows.end(), c.train_space) - rows.begin());
          const size_t cc = static_cast<size_t>(
              std::find(cols.begin(), cols.end(), c.test_space) - cols.begin());
          grid[r][cc] = std::string(metric) == "score" ? c.score : c.rate;
        }
        write_heatmap_svg(out_dir + "/heatmap_" + algo + "_" + mode + "_" +
                              metric + ".svg",
                          algo + "-" + mode + " c_" + metric, rows, cols, grid);
      }
    }
  }
  return report;
}

}  // namespace metacon
