#include "metacon/pg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metacon {

Eigen::VectorXd discounted_returns(const Eigen::VectorXd& rewards, double gamma) {
  Eigen::VectorXd g(rewards.size());
  double acc = 0.0;
  for (long t = rewards.size() - 1; t >= 0; --t) {
    acc = rewards(t) + gamma * acc;
    g(t) = acc;
  }
  return g;
}

Eigen::VectorXd gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                    double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw std::runtime_error("gae: values needs one bootstrap entry beyond rewards");
  Eigen::VectorXd adv(rewards.size());
  double acc = 0.0;
  for (long t = rewards.size() - 1; t >= 0; --t) {
    const double delta = rewards(t) + gamma * values(t + 1) - values(t);
    acc = delta + gamma * lambda * acc;
    adv(t) = acc;
  }
  return adv;
}

Adam::Adam(double lr_, std::vector<std::string> names_)
    : lr(lr_), names(std::move(names_)) {}

void Adam::step(ParamSet& params, const GradSet& grads) {
  if (m.size() == 0) {
    m = zeros_like(params);
    v = zeros_like(params);
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto updatable = [&](const std::string& n) {
    return names.empty() || std::find(names.begin(), names.end(), n) != names.end();
  };
  for (size_t i = 0; i < params.entries().size(); ++i) {
    const std::string& name = params.entries()[i].name;
    if (!updatable(name)) continue;
    const Mat& g = grads.at(name);
    Mat& mi = m.at(name);
    Mat& vi = v.at(name);
    mi = beta1 * mi + (1.0 - beta1) * g;
    vi = (beta2 * vi.array() + (1.0 - beta2) * g.array().square()).matrix();
    params.entries()[i].value.array() -=
        lr * (mi.array() / bc1) / ((vi.array() / bc2).sqrt() + eps);
  }
}

double global_norm(const GradSet& g) {
  double s = 0.0;
  for (const auto& e : g.entries()) s += e.value.squaredNorm();
  return std::sqrt(s);
}

void clip_global_norm(GradSet& g, double max_norm) {
  const double n = global_norm(g);
  if (n > max_norm && n > 0.0) {
    const double scale = max_norm / n;
    for (auto& e : g.entries()) e.value *= scale;
  }
}

long flatten_size(const std::vector<const Trial*>& trials) {
  if (trials.empty()) return 0;
  const long per = trials[0]->frames();
  for (const auto* t : trials)
    if (t->frames() != per)
      throw std::runtime_error("flatten: heterogeneous trial batch");
  return per * static_cast<long>(trials.size());
}

namespace {
// maps a trial-timeline step to (episode, in-episode step)
std::pair<int, int> timeline(const Trial& t, int step) {
  int ep = 0;
  while (step >= t.episodes[static_cast<size_t>(ep)].length()) {
    step -= t.episodes[static_cast<size_t>(ep)].length();
    ++ep;
  }
  return {ep, step};
}
}  // namespace

Eigen::VectorXd flatten_step_major(
    const std::vector<const Trial*>& trials,
    const std::function<double(const Episode&, int)>& get) {
  const long n = flatten_size(trials);
  const long B = static_cast<long>(trials.size());
  const long steps = n / B;
  Eigen::VectorXd out(n);
  for (long t = 0; t < steps; ++t)
    for (long b = 0; b < B; ++b) {
      auto [ep, s] = timeline(*trials[static_cast<size_t>(b)], static_cast<int>(t));
      out(t * B + b) = get(trials[static_cast<size_t>(b)]->episodes[static_cast<size_t>(ep)], s);
    }
  return out;
}

Mat gather_rows_step_major(
    const std::vector<const Trial*>& trials,
    const std::function<Eigen::RowVectorXd(const Episode&, int)>& get) {
  const long n = flatten_size(trials);
  const long B = static_cast<long>(trials.size());
  const long steps = n / B;
  Mat out;
  for (long t = 0; t < steps; ++t)
    for (long b = 0; b < B; ++b) {
      auto [ep, s] = timeline(*trials[static_cast<size_t>(b)], static_cast<int>(t));
      Eigen::RowVectorXd row =
          get(trials[static_cast<size_t>(b)]->episodes[static_cast<size_t>(ep)], s);
      if (out.size() == 0) out.resize(n, row.cols());
      out.row(t * B + b) = row;
    }
  return out;
}

namespace {

struct BatchTargets {
  // keyed by episode pointer order within the batch
  std::vector<Eigen::VectorXd> adv;   // normalized advantages per episode
  std::vector<Eigen::VectorXd> ret;   // value targets per episode
};

BatchTargets compute_targets(const RolloutBatch& batch, const PGConfig& cfg) {
  BatchTargets out;
  std::vector<double> all;
  for (const auto& trial : batch.trials)
    for (const auto& ep : trial.episodes) {
      Eigen::VectorXd values(ep.length() + 1);
      values.head(ep.length()) = ep.values;
      values(ep.length()) = 0.0;  // fixed-horizon: no bootstrap past the end
      Eigen::VectorXd a = gae(ep.traj.rewards, values, cfg.discount, cfg.gae_lambda);
      out.ret.push_back(a + ep.values);
      out.adv.push_back(a);
      for (long i = 0; i < a.size(); ++i) all.push_back(a(i));
    }
  double mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
  double sq = 0.0;
  for (double x : all) sq += (x - mean) * (x - mean);
  double sd = std::sqrt(sq / all.size());
  for (auto& a : out.adv) a = ((a.array() - mean) / (sd + 1e-8)).matrix();
  return out;
}

// index of an episode within the batch's (trial, episode) iteration order
std::map<const Episode*, size_t> episode_index(const RolloutBatch& batch) {
  std::map<const Episode*, size_t> idx;
  size_t i = 0;
  for (const auto& trial : batch.trials)
    for (const auto& ep : trial.episodes) idx[&ep] = i++;
  return idx;
}

}  // namespace

UpdateDiag ppo_update(PGModel& model, Adam& opt, const RolloutBatch& batch,
                      const PGConfig& cfg, RandomStream& shuffle_rng) {
  BatchTargets targets = compute_targets(batch, cfg);
  auto ep_index = episode_index(batch);

  std::vector<size_t> order(batch.trials.size());
  std::iota(order.begin(), order.end(), 0);

  UpdateDiag diag;
  int n_steps = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    // Fisher-Yates on the dedicated update stream
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);

    const int mbs = std::max(1, std::min<int>(cfg.minibatch_count,
                                              static_cast<int>(order.size())));
    for (int mb = 0; mb < mbs; ++mb) {
      std::vector<const Trial*> mb_trials;
      for (size_t i = static_cast<size_t>(mb); i < order.size(); i += static_cast<size_t>(mbs))
        mb_trials.push_back(&batch.trials[order[i]]);
      if (mb_trials.empty()) continue;

      Tape tape;
      BoundParams bound = bind(tape, model.params(), true);
      SeqEval ev = model.build_eval(tape, bound, mb_trials);

      auto adv_get = [&](const Episode& e, int s) {
        return targets.adv[ep_index.at(&e)](s);
      };
      auto ret_get = [&](const Episode& e, int s) {
        return targets.ret[ep_index.at(&e)](s);
      };
      auto old_get = [&](const Episode& e, int s) { return e.logps(s); };

      Var adv = tape.constant(flatten_step_major(mb_trials, adv_get));
      Var old_logp = tape.constant(flatten_step_major(mb_trials, old_get));

      Var ratio = tape.exp(tape.sub(ev.logp, old_logp));
      Var clipped = tape.clamp(ratio, 1.0 - cfg.ppo_clip, 1.0 + cfg.ppo_clip);
      Var surr = tape.mean(tape.cmin(tape.mul(ratio, adv), tape.mul(clipped, adv)));
      Var loss = tape.scale(surr, -1.0);
      if (ev.value.valid() && cfg.value_coef != 0.0) {
        Var ret = tape.constant(flatten_step_major(mb_trials, ret_get));
        Var vdiff = tape.sub(ev.value, ret);
        loss = tape.add(loss, tape.scale(tape.mean(tape.mul(vdiff, vdiff)),
                                         cfg.value_coef));
      }
      if (cfg.entropy_coef != 0.0)
        loss = tape.sub(loss, tape.scale(ev.entropy, cfg.entropy_coef));

      const double loss_v = tape.scalar_value(loss);
      if (!std::isfinite(loss_v)) throw std::runtime_error("diverged");
      tape.backward(loss);
      GradSet grads = extract_grads(tape, model.params(), bound);

      diag.loss += loss_v;
      diag.grad_norm += global_norm(grads);
      ++n_steps;

      clip_global_norm(grads, cfg.max_grad_norm);
      opt.step(model.params(), grads);
      if (!model.params().all_finite()) throw std::runtime_error("diverged");
    }
  }
  if (n_steps > 0) {
    diag.loss /= n_steps;
    diag.grad_norm /= n_steps;
  }
  diag.param_norm = model.params().norm();
  return diag;
}

GradSet vanilla_pg_grad(PGModel& model, const RolloutBatch& batch,
                        double discount, double* loss_out) {
  std::vector<const Trial*> trials;
  for (const auto& t : batch.trials) trials.push_back(&t);

  std::map<const Episode*, Eigen::VectorXd> returns;
  double ret_sum = 0.0;
  long n = 0;
  for (const auto* t : trials)
    for (const auto& ep : t->episodes) {
      Eigen::VectorXd g = discounted_returns(ep.traj.rewards, discount);
      ret_sum += g.sum();
      n += g.size();
      returns[&ep] = std::move(g);
    }
  const double baseline = ret_sum / static_cast<double>(n);

  Tape tape;
  BoundParams bound = bind(tape, model.params(), true);
  SeqEval ev = model.build_eval(tape, bound, trials);
  Var adv = tape.constant(flatten_step_major(
      trials, [&](const Episode& e, int s) { return returns.at(&e)(s) - baseline; }));
  Var surr = tape.mean(tape.mul(ev.logp, adv));
  const double v = tape.scalar_value(surr);
  if (!std::isfinite(v)) throw std::runtime_error("diverged");
  if (loss_out) *loss_out = v;
  tape.backward(surr);
  return extract_grads(tape, model.params(), bound);
}

UpdateDiag vanilla_pg_update(PGModel& model, const RolloutBatch& batch,
                             double learning_rate, double discount) {
  UpdateDiag diag;
  GradSet g = vanilla_pg_grad(model, batch, discount, &diag.loss);
  diag.grad_norm = global_norm(g);
  model.params().axpy(learning_rate, g);  // ascent on the surrogate
  if (!model.params().all_finite()) throw std::runtime_error("diverged");
  diag.param_norm = model.params().norm();
  return diag;
}

}  // namespace metacon
