#pragma once

#include "metacon/rng.hpp"
#include "metacon/tape.hpp"

#include <optional>
#include <string>
#include <vector>

namespace metacon {

enum class Family { NavDense, NavSparse, DashVel, DashDir, DashVelB, DashDirB };

std::string family_key(Family f);
Family family_from_key(const std::string& key);

struct EnvSpec {
  Family family;
  int obs_dim = 0;
  int act_dim = 0;
  int horizon = 0;
  double discount = 0.99;
  Eigen::VectorXd action_low, action_high;
};

EnvSpec spec_for(Family f);

// One concrete MDP. Navigation: goal angle phi (goal on the unit circle's
// edge). DashVel: goal velocity. DashDir: direction in {-1, +1}.
// pad_to wraps the task in a larger embodiment's observation/action space
// (cross-embodiment experiments); physics stays the source family's.
struct Task {
  Family family;
  double param = 0.0;
  std::optional<Family> pad_to;

  std::string id() const;
};

EnvSpec effective_spec(const Task& t);

// Sampleable region of task parameterizations. Navigation regions are the
// four half-open 90-degree arcs centered on the axis directions; DashVel
// regions are the six half-open unit intervals; DashDir samples both
// directions uniformly. Point regions ("phi=...", "v=...", "d=...") pin a
// single task.
struct TaskSpace {
  Family family;
  std::string region;

  enum class Kind { Arc, Interval, DirBoth, Point };
  Kind kind = Kind::Arc;
  double lo = 0.0, hi = 0.0;  // arc/interval bounds; Point: lo == hi

  std::string key() const { return family_key(family) + ":" + region; }
};

TaskSpace parse_space(const std::string& key);
Task sample_task(const TaskSpace& space, RandomStream& rng);

struct StepResult {
  Eigen::VectorXd next_obs;
  double reward = 0.0;
  bool done = false;
};

// Per-episode record. All sequences are aligned; done is true only on the
// final step (episodes always run to the horizon).
struct Trajectory {
  std::string task_id;
  Mat obs;      // H x obs_dim (observation before each action)
  Mat actions;  // H x act_dim
  Eigen::VectorXd rewards;
  std::vector<uint8_t> dones;
  Eigen::VectorXd final_obs;

  int length() const { return static_cast<int>(rewards.size()); }
  double ret() const { return rewards.sum(); }
};

// Stateful convenience wrapper over the pure transition functions.
class Env {
 public:
  explicit Env(const Task& task);

  Eigen::VectorXd reset();
  StepResult step(const Eigen::VectorXd& action);

  const EnvSpec& spec() const { return spec_; }
  const Task& task() const { return task_; }
  int steps_taken() const { return t_; }

 private:
  Task task_;
  EnvSpec spec_;       // effective (padded) spec
  EnvSpec base_spec_;  // source family's spec
  Eigen::Vector2d pos_ = Eigen::Vector2d::Zero();
  double vel_ = 0.0;
  int t_ = 0;

  Eigen::VectorXd observe() const;
};

// Cross-embodiment adapter (zero-pad up, truncate down). Only families in
// the same group pair up; anything else throws "no adapter".
bool padding_compatible(Family a, Family b);
Eigen::VectorXd pad_obs(const Eigen::VectorXd& obs, const EnvSpec& src,
                        const EnvSpec& dst);
Eigen::VectorXd unpad_obs(const Eigen::VectorXd& obs, const EnvSpec& src,
                          const EnvSpec& dst);
// Length dst.act_dim; 1.0 marks dimensions the source actually actuates.
Eigen::RowVectorXd action_mask(const EnvSpec& src, const EnvSpec& dst);

}  // namespace metacon
