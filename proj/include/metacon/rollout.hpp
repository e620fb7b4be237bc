#pragma once

#include "metacon/env.hpp"
#include "metacon/param_set.hpp"

#include <memory>
#include <vector>

namespace metacon {

// Trajectory plus the quantities recorded at sampling time.
struct Episode {
  Task task;
  Trajectory traj;
  Eigen::VectorXd logps;
  Eigen::VectorXd values;
  Mat beliefs;  // H x 2*latent for belief-conditioned policies, else empty

  double ret() const { return traj.ret(); }
  int length() const { return traj.length(); }
};

// Unit of recurrent unrolling: episodes whose hidden state may persist.
struct Trial {
  std::vector<Episode> episodes;
  long frames() const {
    long n = 0;
    for (const auto& e : episodes) n += e.length();
    return n;
  }
};

struct RolloutBatch {
  std::vector<Trial> trials;

  long frames() const {
    long n = 0;
    for (const auto& t : trials) n += t.frames();
    return n;
  }
  std::vector<const Episode*> all_episodes() const {
    std::vector<const Episode*> out;
    for (const auto& t : trials)
      for (const auto& e : t.episodes) out.push_back(&e);
    return out;
  }
};

// A policy bound to concrete parameters, with whatever recurrent/belief
// state it carries between steps.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual void begin_trial(const Task& task) = 0;
  virtual void begin_episode() = 0;
  virtual Eigen::RowVectorXd act(const Eigen::VectorXd& obs, RandomStream& rng,
                                 double& logp, double& value,
                                 bool deterministic = false) = 0;
  virtual void observe(const Eigen::RowVectorXd& action, double reward,
                       const Eigen::VectorXd& next_obs, bool done) {
    (void)action; (void)reward; (void)next_obs; (void)done;
  }
  // (mu, sigma) trace entry for belief-conditioned policies.
  virtual Eigen::RowVectorXd belief() const { return {}; }
};

Episode run_episode(Actor& actor, Env& env, RandomStream& rng,
                    bool deterministic = false);
Trial run_trial(Actor& actor, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic = false);

// ceil(n_frames / horizon) full episodes on one task, grouped into trials of
// `episodes_per_trial`.
RolloutBatch collect(Actor& actor, const Task& task, long n_frames,
                     int episodes_per_trial, RandomStream& rng);

// Mean undiscounted return over n episodes run as one trial.
double evaluate(Actor& actor, const Task& task, int n_episodes,
                RandomStream& rng, bool deterministic = false);

}  // namespace metacon
