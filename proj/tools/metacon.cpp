#include "metacon/fd_suite.hpp"
#include "metacon/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace metacon;

namespace {

ExperimentConfig load_experiment(const std::string& config_path,
                                 uint64_t seed_override, bool have_seed,
                                 const std::string& out_override,
                                 long budget_override) {
  Config c = config_path.empty() ? Config::parse_string("")
                                 : Config::parse_file(config_path);
  ExperimentConfig e = experiment_from_config(c);
  if (have_seed) e.root_seed = seed_override;
  if (!out_override.empty()) e.out_dir = out_override;
  if (budget_override > 0) {
    e.meta_train_frames = budget_override;
    e.meta_train_frames_maml = budget_override;
    e.single_task_frames = budget_override;
    e.multi_task_frames = budget_override;
    e.multi_task_frames_maml = budget_override;
  }
  return e;
}

int default_workers() {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return worker_count_from_env(std::max(1, hw));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metacon: meta-RL out-of-distribution adaptation benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_dir, algo, train_space, test_space, mode = "ga";
  std::string ckpt_path, task_key, dir, csv_out;
  uint64_t root_seed = 0;
  bool have_seed = false;
  int seed_index = 0;
  long budget = 0;
  int workers = default_workers();
  int episodes = 10;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file");
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--budget", budget, "frame budget override");
    cmd->add_option_function<uint64_t>(
        "--seed", [&](uint64_t v) { root_seed = v; have_seed = true; },
        "root seed override");
  };

  auto* mt = app.add_subcommand("meta-train", "meta-train one (algo, train-space, seed)");
  add_common(mt);
  mt->add_option("--algo", algo, "maml | rl2 | varibad")->required();
  mt->add_option("--train-space", train_space, "region key, e.g. left")->required();
  mt->add_option("--seed-index", seed_index, "seed index within the experiment");
  mt->add_flag("--resume", resume, "resume from state.bin if present");

  auto* ad = app.add_subcommand("adapt", "run one adaptation cell from a checkpoint");
  add_common(ad);
  ad->add_option("--algo", algo)->required();
  ad->add_option("--train-space", train_space)->required();
  ad->add_option("--test-space", test_space)->required();
  ad->add_option("--mode", mode, "default | ga | cmt");
  ad->add_option("--seed-index", seed_index);

  auto* ex = app.add_subcommand("expert", "scratch expert baseline on one test task");
  add_common(ex);
  ex->add_option("--train-space", train_space)->required();
  ex->add_option("--test-space", test_space)->required();
  ex->add_option("--seed-index", seed_index);

  auto* gr = app.add_subcommand("grid", "expand and run the full experiment grid");
  add_common(gr);
  gr->add_option("--workers", workers, "parallel cell workers");

  auto* rp = app.add_subcommand("report", "build consistency report from a run directory");
  rp->add_option("--dir", dir, "grid output directory")->required();
  rp->add_option("--out", csv_out, "report csv path (default <dir>/report.csv)");

  auto* dt = app.add_subcommand("dump-traj", "episode/belief dumps from a checkpoint");
  add_common(dt);
  dt->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  dt->add_option("--task", task_key, "task key, e.g. nav_sparse:phi=0 or nav_sparse:right")
      ->required();
  dt->add_option("--episodes", episodes, "episodes to run");
  dt->add_option("--mode", mode, "default (unroll only) | ga");

  auto* fd = app.add_subcommand("fd-suite", "finite-difference gradient checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mt->parsed()) {
      ExperimentConfig e = load_experiment(config_path, root_seed, have_seed,
                                           out_dir, budget);
      run_meta_train(e, algo, train_space, seed_index, resume);
      std::cout << "meta-train done: "
                << run_dir(e.out_dir, meta_cell(algo, train_space), "meta_train",
                           seed_index)
                << "\n";
    } else if (ad->parsed()) {
      ExperimentConfig e = load_experiment(config_path, root_seed, have_seed,
                                           out_dir, budget);
      run_adapt_cell(e, algo, train_space, test_space, mode, seed_index);
      std::cout << "adapt done: "
                << run_dir(e.out_dir, adapt_cell(algo, train_space, test_space),
                           mode, seed_index)
                << "\n";
    } else if (ex->parsed()) {
      ExperimentConfig e = load_experiment(config_path, root_seed, have_seed,
                                           out_dir, budget);
      run_expert(e, train_space, test_space, seed_index);
      std::cout << "expert done: "
                << run_dir(e.out_dir, expert_cell(train_space, test_space),
                           "scratch", seed_index)
                << "\n";
    } else if (gr->parsed()) {
      ExperimentConfig e = load_experiment(config_path, root_seed, have_seed,
                                           out_dir, budget);
      GridPlan plan = run_grid(e, worker_count_from_env(workers));
      std::cout << "grid done: " << plan.meta_train_runs << " meta-train, "
                << plan.expert_runs << " expert, " << plan.scratch_meta_runs
                << " scratch-meta, " << plan.adaptation_cells
                << " adaptation cells\n";
    } else if (rp->parsed()) {
      if (csv_out.empty()) csv_out = dir + "/report.csv";
      ConsistencyReport rep = report_from_dir(dir, csv_out);
      for (const auto& s : rep.summaries)
        std::cout << s.algo << "-" << s.mode << ": OOD mean c_score "
                  << s.ood_score_mean << ", c_rate " << s.ood_rate_mean << " ("
                  << s.ood_cells << " cells)\n";
      std::cout << "report written to " << csv_out << "\n";
    } else if (dt->parsed()) {
      Config c = config_path.empty() ? Config::parse_string("")
                                     : Config::parse_file(config_path);
      ExperimentConfig e = experiment_from_config(c);
      if (have_seed) e.root_seed = root_seed;
      Checkpoint ck = load_checkpoint(ckpt_path);
      TaskSpace space = parse_space(task_key);
      EnvSpec spec = spec_for(space.family);
      auto agent = agent_from_checkpoint(ck, spec, e.backbone);
      agent->reset_optimizers();
      SeedTree tree(e.root_seed);
      RandomStream task_rng = tree.child("dump_task").stream();
      Task task = sample_task(space, task_rng);
      LoopConfig loop = e.loop;
      loop.frame_budget = static_cast<long>(episodes) * spec.horizon;
      loop.dump_trajs = true;
      AdaptationRun run = run_single_task(*agent, task, mode == "ga", loop,
                                          tree.child("dump"), tree.child("dump_eval"));
      RunMeta meta{ck.algo, mode, "dump", space.region, family_key(space.family),
                   "", 0, loop.frame_budget};
      const std::string out = out_dir.empty() ? "dump_out" : out_dir;
      write_run_artifacts(out, meta, run);
      std::cout << "wrote " << run.dumps.size() << " episodes to " << out
                << "/traj_dump.jsonl\n";
    } else if (fd->parsed()) {
      bool ok = true;
      for (const auto& c : run_fd_suite()) {
        std::cout << (c.passed() ? "PASS " : "FAIL ") << c.name
                  << "  max_rel_err=" << c.max_rel_err << " (tol " << c.tolerance
                  << ")\n";
        ok = ok && c.passed();
      }
      if (!ok) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
