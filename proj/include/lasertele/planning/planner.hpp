#pragma once

#include "lasertele/planning/collision.hpp"

#include <random>
#include <string>
#include <variant>

namespace lasertele {

struct Waypoint {
  double t = 0.0;
  JointVector q = JointVector::Zero();
};

struct Trajectory {
  std::vector<Waypoint> waypoints;
  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }

  /// Linear interpolation in joint space, clamped to the end points.
  JointVector sample(double t) const {
    if (waypoints.empty()) return JointVector::Zero();
    if (t <= waypoints.front().t) return waypoints.front().q;
    if (t >= waypoints.back().t) return waypoints.back().q;
    auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                               [](double x, const Waypoint& w) { return x < w.t; });
    const Waypoint& b = *it;
    const Waypoint& a = *(it - 1);
    double s = (t - a.t) / (b.t - a.t);
    return a.q + s * (b.q - a.q);
  }
};

enum class PlanError { IkUnreachable, NoPathFound };

inline std::string to_string(PlanError e) { return e == PlanError::IkUnreachable ? "IkUnreachable" : "NoPathFound"; }

struct PlannerOptions {
  double step = 0.1;                // rad, RRT extension length
  int max_samples = 20000;
  int shortcut_attempts = 100;
  int ik_restarts = 10;
  double edge_resolution = 0.02;    // rad, max joint change between edge samples
  double clearance = 0.005;         // m, extra clearance that certifies edges between samples
  double goal_clear_radius = 0.06;  // m, voxels this close to the goal point are dropped
  std::uint64_t seed = 1;
  IkOptions ik;
};

/// Tcp z along -z of base_link, tcp x along +x: the same for every point.
inline Quat top_grasp_orientation(const Vec3& /*goal_point*/ = Vec3::Zero()) {
  return Quat(Eigen::AngleAxisd(kPi, Vec3::UnitX()));
}

/// Upper bound on how far any collision-capsule point moves per radian of
/// each joint: distance from the joint origin to the farthest downstream
/// capsule point, bounded by summing link offsets.
inline JointVector joint_reach_bounds(const ArmModel& model) {
  JointVector r = JointVector::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    double chain = 0.0;
    double tip = 0.0;
    for (int k = j + 1; k < kNumJoints; ++k) chain += model.joints[k].origin.position.norm();
    for (const auto& c : model.capsules) {
      if (c.frame < j + 1) continue;
      // chain offsets between joint j+1 and the capsule frame
      double offs = 0.0;
      for (int k = c.frame; k < kNumJoints; ++k) offs += model.joints[k].origin.position.norm();
      tip = std::max(tip, chain - offs + std::max(c.a.norm(), c.b.norm()));
    }
    r[j] = tip;
  }
  return r;
}

class Planner {
 public:
  Planner(const CollisionWorld& world, PlannerOptions opt = {})
      : world_(world), opt_(opt), reach_(joint_reach_bounds(world.model)), rng_(opt.seed) {}

  const CollisionWorld& world() const { return world_; }

  bool config_free(const JointVector& q) const { return !in_collision(world_, q, clearance_); }

  /// Samples strictly after `a` up to and including `b`; spacing keeps joint
  /// steps within edge_resolution and capsule motion within the clearance.
  bool edge_free(const JointVector& a, const JointVector& b) const {
    JointVector d = b - a;
    double motion = d.cwiseAbs().dot(reach_);
    int n = std::max(1, int(std::ceil(std::max(d.cwiseAbs().maxCoeff() / opt_.edge_resolution, motion / clearance_))));
    for (int i = 1; i <= n; ++i)
      if (!config_free(a + d * (double(i) / n))) return false;
    return true;
  }

  std::variant<Trajectory, PlanError> plan(const JointVector& q_start, const Pose& goal) {
    if (in_collision(world_, q_start)) return PlanError::NoPathFound;
    // Certification needs the start to clear the padded test; shrink the pad
    // when the arm already sits closer than that to something.
    clearance_ = opt_.clearance;
    while (in_collision(world_, q_start, clearance_) && clearance_ > 5e-4) clearance_ *= 0.5;
    if (in_collision(world_, q_start, clearance_)) return PlanError::NoPathFound;

    bool any_ik = false;
    std::optional<JointVector> q_goal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    JointVector lo = world_.model.lower(), hi = world_.model.upper();
    for (int attempt = 0; attempt <= opt_.ik_restarts && !q_goal; ++attempt) {
      JointVector seed = q_start;
      if (attempt > 0)
        for (int i = 0; i < kNumJoints; ++i) seed[i] = lo[i] + unit(rng_) * (hi[i] - lo[i]);
      auto sol = ik(world_.model, goal, seed, opt_.ik);
      if (!sol) continue;
      any_ik = true;
      if (config_free(sol->q)) q_goal = sol->q;
    }
    if (!any_ik) return PlanError::IkUnreachable;
    if (!q_goal) return PlanError::NoPathFound;

    auto path = connect(q_start, *q_goal);
    if (!path) return PlanError::NoPathFound;
    shortcut(*path);
    return time_parameterize(*path, world_.model);
  }

  /// Time stamps so the slowest joint of each segment runs at its limit.
  static Trajectory time_parameterize(const std::vector<JointVector>& path, const ArmModel& model) {
    Trajectory traj;
    JointVector vmax = model.max_velocity();
    double t = 0.0;
    traj.waypoints.push_back({0.0, path.front()});
    for (std::size_t i = 1; i < path.size(); ++i) {
      double dt = ((path[i] - path[i - 1]).cwiseAbs().array() / vmax.array()).maxCoeff();
      if (dt <= 0.0) continue;
      t += dt;
      traj.waypoints.push_back({t, path[i]});
    }
    return traj;
  }

 private:
  struct Node {
    JointVector q;
    int parent;
  };
  using Tree = std::vector<Node>;

  enum class Extend { Trapped, Advanced, Reached };

  static int nearest(const Tree& tree, const JointVector& q) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < int(tree.size()); ++i) {
      double d = (tree[i].q - q).squaredNorm();
      if (d < bd) bd = d, best = i;
    }
    return best;
  }

  Extend extend(Tree& tree, const JointVector& target) const {
    int near = nearest(tree, target);
    JointVector from = tree[near].q;
    JointVector d = target - from;
    double len = d.norm();
    bool reach = len <= opt_.step;
    JointVector to = reach ? target : JointVector(from + d * (opt_.step / len));
    if (!config_free(to) || !edge_free(from, to)) return Extend::Trapped;
    tree.push_back({to, near});
    return reach ? Extend::Reached : Extend::Advanced;
  }

  static std::vector<JointVector> trace(const Tree& tree, int i) {
    std::vector<JointVector> out;
    for (; i >= 0; i = tree[i].parent) out.push_back(tree[i].q);
    return out;
  }

  std::optional<std::vector<JointVector>> connect(const JointVector& start, const JointVector& goal) {
    if (edge_free(start, goal)) return std::vector<JointVector>{start, goal};
    Tree a{{start, -1}}, b{{goal, -1}};
    bool a_is_start = true;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    JointVector lo = world_.model.lower(), hi = world_.model.upper();
    for (int s = 0; s < opt_.max_samples; ++s) {
      JointVector q;
      for (int i = 0; i < kNumJoints; ++i) q[i] = lo[i] + unit(rng_) * (hi[i] - lo[i]);
      if (extend(a, q) != Extend::Trapped) {
        JointVector q_new = a.back().q;
        Extend r;
        do r = extend(b, q_new);
        while (r == Extend::Advanced);
        if (r == Extend::Reached) {
          auto pa = trace(a, int(a.size()) - 1);
          auto pb = trace(b, int(b.size()) - 1);
          std::reverse(pa.begin(), pa.end());
          pa.insert(pa.end(), pb.begin() + 1, pb.end());  // both end in q_new
          if (!a_is_start) std::reverse(pa.begin(), pa.end());
          return pa;
        }
      }
      std::swap(a, b);
      a_is_start = !a_is_start;
    }
    return std::nullopt;
  }

  void shortcut(std::vector<JointVector>& path) {
    for (int k = 0; k < opt_.shortcut_attempts && path.size() > 2; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, path.size() - 1);
      std::size_t i = pick(rng_), j = pick(rng_);
      if (i > j) std::swap(i, j);
      if (j - i < 2) continue;
      if (edge_free(path[i], path[j])) path.erase(path.begin() + i + 1, path.begin() + j);
    }
  }

  const CollisionWorld& world_;
  PlannerOptions opt_;
  JointVector reach_;
  std::mt19937_64 rng_;
  double clearance_ = 0.005;
};

/// Full planning request: drops voxels around the goal point (the pointed
/// object itself), then plans. The input world is left untouched.
inline CollisionWorld planning_world(const CollisionWorld& world, const Vec3& goal_point,
                                     const PlannerOptions& opt = {}) {
  CollisionWorld w = world;
  w.grid.clear_near_segment(goal_point, goal_point, opt.goal_clear_radius);
  return w;
}

inline std::variant<Trajectory, PlanError> plan(const CollisionWorld& world, const JointVector& q_start,
                                                const Pose& goal, const PlannerOptions& opt = {}) {
  CollisionWorld w = planning_world(world, goal.position, opt);
  Planner planner(w, opt);
  return planner.plan(q_start, goal);
}

/// Dense validity check at `spacing` rad along the piecewise-linear path.
inline int count_collisions_dense(const CollisionWorld& world, const Trajectory& traj, double spacing = 1e-3) {
  int hits = 0;
  const auto& w = traj.waypoints;
  if (w.empty()) return 0;
  if (in_collision(world, w.front().q)) ++hits;
  for (std::size_t i = 1; i < w.size(); ++i) {
    JointVector d = w[i].q - w[i - 1].q;
    int n = std::max(1, int(std::ceil(d.cwiseAbs().maxCoeff() / spacing)));
    for (int k = 1; k <= n; ++k)
      if (in_collision(world, JointVector(w[i - 1].q + d * (double(k) / n)))) ++hits;
  }
  return hits;
}

}  // namespace lasertele
