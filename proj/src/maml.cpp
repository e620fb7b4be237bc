#include "metacon/maml.hpp"

namespace metacon {

ParamSet maml_inner_adapt(MlpPolicyModel& model, const ParamSet& theta,
                          const Task& task, int k_steps, double inner_lr,
                          const MamlConfig& cfg, RandomStream& rollout_rng,
                          MamlInnerDiag* diag) {
  model.params() = theta;
  const int H = effective_spec(task).horizon;
  for (int k = 0; k < k_steps; ++k) {
    auto actor = model.make_actor();
    RolloutBatch batch = collect(*actor, task,
                                 static_cast<long>(cfg.inner_batch) * H, 1,
                                 rollout_rng);
    if (diag) diag->frames += batch.frames();
    UpdateDiag d = vanilla_pg_update(model, batch, inner_lr, cfg.discount);
    if (diag) diag->grad_norms.push_back(d.grad_norm);
  }
  return model.params();
}

UpdateDiag maml_outer_update(MlpPolicyModel& model, Adam& outer_opt,
                             const TaskSpace& space, const MamlConfig& cfg,
                             RandomStream& task_rng, RandomStream& rollout_rng,
                             long* frames_used) {
  const ParamSet theta = model.params();
  GradSet acc = zeros_like(theta);
  double loss_acc = 0.0;
  for (int i = 0; i < cfg.outer_batch; ++i) {
    Task task = sample_task(space, task_rng);
    MamlInnerDiag inner;
    maml_inner_adapt(model, theta, task, cfg.inner_steps, cfg.inner_lr, cfg,
                     rollout_rng, &inner);
    const int H = effective_spec(task).horizon;
    auto actor = model.make_actor();
    RolloutBatch post = collect(*actor, task,
                                static_cast<long>(cfg.inner_batch) * H, 1,
                                rollout_rng);
    double loss = 0.0;
    GradSet g = vanilla_pg_grad(model, post, cfg.discount, &loss);
    acc.axpy(1.0, g);
    loss_acc += loss;
    if (frames_used) *frames_used += inner.frames + post.frames();
  }
  const double inv = 1.0 / static_cast<double>(cfg.outer_batch);
  for (auto& e : acc.entries()) e.value *= inv;

  model.params() = theta;
  UpdateDiag diag;
  diag.loss = loss_acc * inv;
  diag.grad_norm = global_norm(acc);
  // ascent on the surrogate: Adam performs descent, so feed the negation
  GradSet neg = acc;
  for (auto& e : neg.entries()) e.value *= -1.0;
  outer_opt.step(model.params(), neg);
  if (!model.params().all_finite()) throw std::runtime_error("diverged");
  diag.param_norm = model.params().norm();
  return diag;
}

}  // namespace metacon
