#include "metacon/env.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace metacon {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNavStep = 0.1;     // per-component displacement clip
constexpr double kSparseRadius = 0.2;
constexpr double kDashAccel = 0.1;   // velocity gain per unit action
constexpr double kDashDt = 0.1;

bool is_nav(Family f) { return f == Family::NavDense || f == Family::NavSparse; }
bool is_dash_b(Family f) { return f == Family::DashVelB || f == Family::DashDirB; }
bool is_vel(Family f) { return f == Family::DashVel || f == Family::DashVelB; }
}  // namespace

std::string family_key(Family f) {
  switch (f) {
    case Family::NavDense: return "nav_dense";
    case Family::NavSparse: return "nav_sparse";
    case Family::DashVel: return "dash_vel";
    case Family::DashDir: return "dash_dir";
    case Family::DashVelB: return "dash_vel_b";
    case Family::DashDirB: return "dash_dir_b";
  }
  throw std::runtime_error("bad family");
}

Family family_from_key(const std::string& key) {
  if (key == "nav_dense") return Family::NavDense;
  if (key == "nav_sparse") return Family::NavSparse;
  if (key == "dash_vel") return Family::DashVel;
  if (key == "dash_dir") return Family::DashDir;
  if (key == "dash_vel_b") return Family::DashVelB;
  if (key == "dash_dir_b") return Family::DashDirB;
  throw std::runtime_error("unknown task family '" + key + "'");
}

EnvSpec spec_for(Family f) {
  EnvSpec s;
  s.family = f;
  if (is_nav(f)) {
    s.obs_dim = 2;
    s.act_dim = 2;
    s.horizon = 100;
    s.action_low = Eigen::VectorXd::Constant(2, -kNavStep);
    s.action_high = Eigen::VectorXd::Constant(2, kNavStep);
  } else {
    s.obs_dim = is_dash_b(f) ? 5 : 3;
    s.act_dim = is_dash_b(f) ? 2 : 1;
    s.horizon = 200;
    s.action_low = Eigen::VectorXd::Constant(s.act_dim, -1.0);
    s.action_high = Eigen::VectorXd::Constant(s.act_dim, 1.0);
  }
  return s;
}

std::string Task::id() const {
  std::ostringstream os;
  os << family_key(family) << ":";
  if (is_nav(family))
    os << "phi=" << param;
  else if (is_vel(family))
    os << "v=" << param;
  else
    os << "d=" << (param > 0 ? "+1" : "-1");
  if (pad_to) os << "|pad_to=" << family_key(*pad_to);
  return os.str();
}

EnvSpec effective_spec(const Task& t) {
  if (!t.pad_to) return spec_for(t.family);
  if (!padding_compatible(t.family, *t.pad_to))
    throw std::runtime_error("no adapter between " + family_key(t.family) +
                             " and " + family_key(*t.pad_to));
  EnvSpec s = spec_for(*t.pad_to);
  s.family = t.family;  // physics stays the source family's
  return s;
}

TaskSpace parse_space(const std::string& key) {
  auto colon = key.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("bad task space key '" + key + "' (expected family:region)");
  TaskSpace s;
  s.family = family_from_key(key.substr(0, colon));
  s.region = key.substr(colon + 1);
  const std::string& r = s.region;

  auto parse_point = [&](const std::string& prefix) -> bool {
    if (r.rfind(prefix, 0) != 0) return false;
    s.kind = TaskSpace::Kind::Point;
    s.lo = s.hi = std::stod(r.substr(prefix.size()));
    return true;
  };

  if (is_nav(s.family)) {
    if (parse_point("phi=")) return s;
    double center;
    if (r == "right") center = 0.0;
    else if (r == "up") center = kPi / 2;
    else if (r == "left") center = kPi;
    else if (r == "bottom") center = 3 * kPi / 2;
    else throw std::runtime_error("unknown navigation region '" + r + "'");
    s.kind = TaskSpace::Kind::Arc;
    s.lo = center - kPi / 4;
    s.hi = center + kPi / 4;
    return s;
  }
  if (is_vel(s.family)) {
    if (parse_point("v=")) return s;
    if (r.size() >= 5 && r.front() == '[' && r.back() == ']') {
      auto comma = r.find(',');
      if (comma != std::string::npos) {
        s.kind = TaskSpace::Kind::Interval;
        s.lo = std::stod(r.substr(1, comma - 1));
        s.hi = std::stod(r.substr(comma + 1, r.size() - comma - 2));
        if (s.lo < s.hi) return s;
      }
    }
    throw std::runtime_error("unknown velocity region '" + r + "'");
  }
  // direction families
  if (r == "d=+1" || r == "d=1") {
    s.kind = TaskSpace::Kind::Point;
    s.lo = s.hi = 1.0;
    return s;
  }
  if (r == "d=-1") {
    s.kind = TaskSpace::Kind::Point;
    s.lo = s.hi = -1.0;
    return s;
  }
  if (r == "both") {
    s.kind = TaskSpace::Kind::DirBoth;
    return s;
  }
  throw std::runtime_error("unknown direction region '" + r + "'");
}

Task sample_task(const TaskSpace& space, RandomStream& rng) {
  Task t;
  t.family = space.family;
  switch (space.kind) {
    case TaskSpace::Kind::Point:
      t.param = space.lo;
      break;
    case TaskSpace::Kind::Arc:
    case TaskSpace::Kind::Interval:
      // half-open [lo, hi): boundary values belong to exactly one region
      t.param = space.lo == space.hi ? space.lo
                                     : rng.uniform(space.lo, space.hi);
      break;
    case TaskSpace::Kind::DirBoth:
      t.param = rng.uniform() < 0.5 ? -1.0 : 1.0;
      break;
  }
  return t;
}

Env::Env(const Task& task)
    : task_(task), spec_(effective_spec(task)), base_spec_(spec_for(task.family)) {}

Eigen::VectorXd Env::observe() const {
  Eigen::VectorXd o(base_spec_.obs_dim);
  if (is_nav(task_.family)) {
    o << pos_.x(), pos_.y();
  } else {
    o.setZero();
    o(0) = pos_.x();
    o(1) = vel_;
    o(2) = static_cast<double>(t_) / base_spec_.horizon;
  }
  if (task_.pad_to) return pad_obs(o, base_spec_, spec_for(*task_.pad_to));
  return o;
}

Eigen::VectorXd Env::reset() {
  pos_.setZero();
  vel_ = 0.0;
  t_ = 0;
  return observe();
}

StepResult Env::step(const Eigen::VectorXd& action) {
  if (!action.allFinite()) throw std::runtime_error("invalid action");
  if (action.size() != spec_.act_dim)
    throw std::runtime_error("step: action dimension mismatch");
  StepResult r;
  if (is_nav(task_.family)) {
    const Eigen::Vector2d goal(std::cos(task_.param), std::sin(task_.param));
    pos_.x() += std::clamp(action(0), -kNavStep, kNavStep);
    pos_.y() += std::clamp(action(1), -kNavStep, kNavStep);
    const double dist = (pos_ - goal).norm();
    if (task_.family == Family::NavDense) {
      r.reward = -dist;
    } else {
      // Sparse variant: zero outside the radius; inside, the dense reward
      // shifted up by one so reaching the goal region pays.
      r.reward = dist <= kSparseRadius ? 1.0 - dist : 0.0;
    }
  } else {
    vel_ += std::clamp(action(0), -1.0, 1.0) * kDashAccel;
    pos_.x() += vel_ * kDashDt;
    r.reward = is_vel(task_.family) ? -std::abs(vel_ - task_.param)
                                    : task_.param * vel_;
  }
  ++t_;
  r.done = t_ >= base_spec_.horizon;
  r.next_obs = observe();
  return r;
}

bool padding_compatible(Family a, Family b) {
  if (a == b) return true;
  return !is_nav(a) && !is_nav(b);  // any dash pairing; nav only with itself
}

Eigen::VectorXd pad_obs(const Eigen::VectorXd& obs, const EnvSpec& src,
                        const EnvSpec& dst) {
  if (!padding_compatible(src.family, dst.family))
    throw std::runtime_error("no adapter between " + family_key(src.family) +
                             " and " + family_key(dst.family));
  if (obs.size() != src.obs_dim)
    throw std::runtime_error("pad_obs: observation dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dst.obs_dim);
  const int n = std::min(src.obs_dim, dst.obs_dim);
  out.head(n) = obs.head(n);
  return out;
}

Eigen::VectorXd unpad_obs(const Eigen::VectorXd& obs, const EnvSpec& src,
                          const EnvSpec& dst) {
  if (obs.size() != dst.obs_dim)
    throw std::runtime_error("unpad_obs: observation dimension mismatch");
  return obs.head(src.obs_dim);
}

Eigen::RowVectorXd action_mask(const EnvSpec& src, const EnvSpec& dst) {
  if (!padding_compatible(src.family, dst.family))
    throw std::runtime_error("no adapter between " + family_key(src.family) +
                             " and " + family_key(dst.family));
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(dst.act_dim);
  for (int i = 0; i < std::min(src.act_dim, dst.act_dim); ++i) m(i) = 1.0;
  return m;
}

}  // namespace metacon
