#pragma once

#include "metacon/models.hpp"

namespace metacon {

struct MamlConfig {
  double inner_lr = 0.1;  // paper grid: {0.1, 0.05, 0.02, 0.01}
  int inner_batch = 10;   // episodes per inner-loop batch
  int outer_batch = 10;   // tasks per outer update
  int inner_steps = 1;
  double outer_lr = 1e-3;
  double discount = 0.99;
};

struct MamlInnerDiag {
  std::vector<double> grad_norms;  // one per inner step
  long frames = 0;
};

// k vanilla policy-gradient steps from `theta`, each on a fresh batch of
// inner_batch episodes from `task`. The model's live parameters are left at
// the adapted point, which is also returned.
ParamSet maml_inner_adapt(MlpPolicyModel& model, const ParamSet& theta,
                          const Task& task, int k_steps, double inner_lr,
                          const MamlConfig& cfg, RandomStream& rollout_rng,
                          MamlInnerDiag* diag = nullptr);

// First-order meta-gradient: inner-adapt on each sampled task, take the
// post-adaptation policy gradient treating the adapted point as constant,
// average across tasks, and apply one (ascent) optimizer step to theta.
UpdateDiag maml_outer_update(MlpPolicyModel& model, Adam& outer_opt,
                             const TaskSpace& space, const MamlConfig& cfg,
                             RandomStream& task_rng, RandomStream& rollout_rng,
                             long* frames_used);

}  // namespace metacon
