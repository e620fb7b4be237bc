#pragma once

#include "metacon/agents.hpp"
#include "metacon/curve.hpp"

#include <limits>

namespace metacon {

// The four protocols: default (no gradients, context methods only), gradient
// adaptation, continued multi-task meta-training, and the two from-scratch
// baselines. Meta-training itself reuses the same loop as cmt/scratch_meta.
enum class AdaptMode { Default, GA, CMT, ScratchExpert, ScratchMeta };

std::string mode_key(AdaptMode m);
AdaptMode mode_from_key(const std::string& k);

struct LoopConfig {
  long frame_budget = 10000;
  double eval_fraction = 0.02;  // evaluation cadence as a fraction of F
  int eval_episodes = 10;       // episodes per single-task probe
  int eval_tasks = 5;           // tasks per meta probe
  bool dump_trajs = false;
};

struct DiagRow {
  long update_idx = 0;
  double loss = 0.0, grad_norm = 0.0, param_norm = 0.0;
};

struct AdaptationRun {
  LearningCurve curve;
  std::vector<DiagRow> diags;
  long frames_used = 0;
  double best_eval = -std::numeric_limits<double>::infinity();
  ParamSet best_params;  // highest-evaluation snapshot (meta loops)
  std::vector<Episode> dumps;
};

// Serializable mid-run state so interrupted meta-training resumes
// deterministically.
struct MetaLoopState {
  long frames = 0;
  LearningCurve curve;
  double best_eval = -std::numeric_limits<double>::infinity();
  ParamSet best_params;
  std::array<uint64_t, 4> task_state{}, rollout_state{}, update_state{}, eval_state{};
  bool valid = false;
};

// Repeated trials on one task; GA updates after every collected batch when
// do_updates is set, the default protocol just unrolls. Evaluation probes
// come from the dedicated eval stream and do not count against the budget.
AdaptationRun run_single_task(Agent& agent, const Task& task, bool do_updates,
                              const LoopConfig& cfg, const SeedTree& run_tree,
                              const SeedTree& eval_tree);

// The algorithm's own meta-training loop on `space`; used for meta-training,
// CMT and the scratch-meta baseline. Tracks the best-evaluation snapshot.
// `state` (optional) resumes a previous run and is left at the final state;
// stop_after_frames > 0 pauses the loop early (checkpoint-resume tests).
AdaptationRun run_meta_loop(Agent& agent, const TaskSpace& space,
                            const LoopConfig& cfg, const SeedTree& run_tree,
                            const SeedTree& eval_tree,
                            MetaLoopState* state = nullptr,
                            long stop_after_frames = -1);

void curve_to_blob(const LearningCurve& c, std::vector<uint8_t>& blob);
LearningCurve curve_from_blob(const std::vector<uint8_t>& blob);

}  // namespace metacon
