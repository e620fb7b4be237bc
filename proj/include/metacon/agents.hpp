#pragma once

#include "metacon/checkpoint.hpp"
#include "metacon/maml.hpp"
#include "metacon/models.hpp"
#include "metacon/rl2.hpp"
#include "metacon/varibad.hpp"

#include <memory>

namespace metacon {

// Hyperparameter bundle shared by the harness.
struct BackboneConfig {
  PGConfig pg;
  MamlConfig maml;
  Rl2Config rl2;
  VaribadConfig varibad;
  MlpPolicyConfig mlp;
  int ga_batch_episodes = 4;    // episodes per gradient-adaptation cycle
  int meta_trials_per_batch = 8;
  int eval_episodes = 10;       // single-task evaluation probe
  int eval_tasks = 5;           // tasks per meta evaluation probe
};

struct Streams {
  RandomStream& task;
  RandomStream& rollout;
  RandomStream& update;
};

struct CycleResult {
  RolloutBatch batch;
  UpdateDiag diag;
  bool updated = false;
};

// Uniform facade over the three meta-RL algorithms and the from-scratch
// expert backbone.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string algo() const = 0;
  virtual PGModel& model() = 0;
  const ParamSet& params() const { return const_cast<Agent*>(this)->model().params(); }

  // one iteration of the algorithm's own meta-training loop on `space`
  virtual UpdateDiag meta_iteration(const TaskSpace& space, Streams& s,
                                    long* frames) = 0;
  // one single-task adaptation cycle: collect a batch on `task` and, when
  // do_update is set, update every component the algorithm trains
  virtual CycleResult adapt_cycle(const Task& task, bool do_update, Streams& s,
                                  long* frames) = 0;

  // deterministic frame cost of one meta iteration / one adaptation cycle,
  // so loops can stop exactly at the budget
  virtual long meta_iteration_frames() const = 0;
  virtual long adapt_cycle_frames() const = 0;

  virtual double evaluate_on(const Task& task, int n_episodes,
                             RandomStream& rng) = 0;
  // mean return over freshly sampled tasks, using the algorithm's own
  // adaptation-at-test procedure (inner gradient steps for MAML, recurrent
  // unrolling for the context methods)
  virtual double meta_evaluate(const TaskSpace& space, int n_tasks,
                               RandomStream& rng) = 0;

  virtual void reset_optimizers() = 0;
  // zeroes policy-gradient terms on padded action dims (cross-embodiment)
  virtual void set_action_mask(const Eigen::RowVectorXd& mask) = 0;
  virtual void save_state(Checkpoint& c) const = 0;
  virtual void load_state(const Checkpoint& c) = 0;
};

std::unique_ptr<Agent> make_agent(const std::string& algo, const EnvSpec& spec,
                                  const BackboneConfig& cfg,
                                  RandomStream& init_rng);
std::unique_ptr<Agent> agent_from_checkpoint(const Checkpoint& c,
                                             const EnvSpec& spec,
                                             const BackboneConfig& cfg);

void save_adam(Checkpoint& c, const std::string& key, const Adam& a);
void load_adam(const Checkpoint& c, const std::string& key, Adam& a);

}  // namespace metacon
