#pragma once

#include "metacon/adaptation.hpp"
#include "metacon/config.hpp"
#include "metacon/metrics.hpp"

#include <functional>
#include <optional>

namespace metacon {

// Fully expanded experiment description. Budgets default to the desk-scale
// values for the family (paper budgets / 200) and are config-overridable.
struct ExperimentConfig {
  std::string name = "experiment";
  Family family = Family::NavDense;
  Family test_family = Family::NavDense;  // differs for cross-embodiment
  std::vector<std::string> algos{"maml", "rl2", "varibad"};
  std::vector<std::string> train_spaces;
  std::vector<std::string> test_spaces;
  std::vector<std::string> modes{"default", "ga"};
  int seeds = 3;
  uint64_t root_seed = 1;
  std::string out_dir = "runs/out";

  long meta_train_frames = 0;  // 0 = family default
  long meta_train_frames_maml = 0;
  long single_task_frames = 0;
  long multi_task_frames = 0;
  long multi_task_frames_maml = 0;

  LoopConfig loop;
  BackboneConfig backbone;
  std::string raw;  // source text, copied into the run directory

  long meta_budget(const std::string& algo) const;
  long multi_budget(const std::string& algo) const;
};

struct FamilyBudgets {
  long meta_train;       // context methods
  long meta_train_maml;
  long single_task;
  long multi_task;
  long multi_task_maml;
};
FamilyBudgets default_budgets(Family f);

BackboneConfig backbone_from_config(const Config& c);
ExperimentConfig experiment_from_config(const Config& c);

// directory naming
std::string sanitize_region(const std::string& region);
std::string meta_cell(const std::string& algo, const std::string& train);
std::string adapt_cell(const std::string& algo, const std::string& train,
                       const std::string& test);
std::string expert_cell(const std::string& train, const std::string& test);
std::string scratch_meta_cell(const std::string& algo, const std::string& test);
std::string run_dir(const std::string& out, const std::string& cell,
                    const std::string& mode, int seed);

struct RunMeta {
  std::string algo, mode, train_space, test_space, family, pair_key;
  int seed = 0;
  long frame_budget = 0;
};
void write_run_artifacts(const std::string& dir, const RunMeta& meta,
                         const AdaptationRun& run);

class WorkerPool {
 public:
  explicit WorkerPool(int workers) : workers_(workers) {}
  void run(std::vector<std::function<void()>> jobs);

 private:
  int workers_;
};

int worker_count_from_env(int fallback);

// The grid driver: meta-training + baselines first, then every
// train x test x mode x seed adaptation cell, all through the worker pool.
// Existing run directories (with a curve.csv) are skipped, so grids resume.
struct GridPlan {
  int meta_train_runs = 0;
  int expert_runs = 0;
  int scratch_meta_runs = 0;
  int adaptation_cells = 0;
};
GridPlan plan_grid(const ExperimentConfig& cfg);
GridPlan run_grid(const ExperimentConfig& cfg, int workers);

// single building blocks (also used by the CLI subcommands)
void run_meta_train(const ExperimentConfig& cfg, const std::string& algo,
                    const std::string& train_space, int seed,
                    bool resume = false);
void run_expert(const ExperimentConfig& cfg, const std::string& train_space,
                const std::string& test_space, int seed);
void run_scratch_meta(const ExperimentConfig& cfg, const std::string& algo,
                      const std::string& test_space, int seed);
void run_adapt_cell(const ExperimentConfig& cfg, const std::string& algo,
                    const std::string& train_space, const std::string& test_space,
                    const std::string& mode, int seed);

// the concrete test task of a (train, test, seed) cell
Task cell_task(const ExperimentConfig& cfg, const std::string& train_space,
               const std::string& test_space, int seed);

// report assembly from a grid output directory
struct LoadedRuns {
  std::vector<RunRef> meta;
  std::vector<RunRef> scratch;
  long frame_budget = 0;
};
LoadedRuns load_runs(const std::string& out_dir);
ConsistencyReport report_from_dir(const std::string& out_dir,
                                  const std::string& csv_path,
                                  bool emit_heatmaps = true);

}  // namespace metacon
