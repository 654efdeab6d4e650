#pragma once

#include "lasertele/core/geometry.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lasertele {

inline constexpr int kNumJoints = 6;
using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using Jacobian = Eigen::Matrix<double, 6, kNumJoints>;

struct Joint {
  std::string name;
  Pose origin;  // transform from the parent frame, applied before the rotation
  Vec3 axis = Vec3::UnitZ();
  double lower = -kPi;
  double upper = kPi;
  double max_velocity = 1.0;
};

/// Collision capsule attached to a chain frame (0 = base_link, k = after joint k).
struct LinkCapsule {
  std::string name;
  int frame = 0;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct ArmModel {
  std::string name = "arm";
  std::array<Joint, kNumJoints> joints;
  Pose tool;  // last joint frame -> tcp ("dagana_tcp")
  std::vector<LinkCapsule> capsules;
  std::vector<std::pair<std::string, std::string>> disabled_collisions;
  JointVector ready = JointVector::Zero();  // well-conditioned start configuration
  double gripper_travel_time = 0.5;
  double gripper_max_opening = 0.10;  // m, at aperture 1

  JointVector lower() const {
    JointVector v;
    for (int i = 0; i < kNumJoints; ++i) v[i] = joints[i].lower;
    return v;
  }
  JointVector upper() const {
    JointVector v;
    for (int i = 0; i < kNumJoints; ++i) v[i] = joints[i].upper;
    return v;
  }
  JointVector max_velocity() const {
    JointVector v;
    for (int i = 0; i < kNumJoints; ++i) v[i] = joints[i].max_velocity;
    return v;
  }
  JointVector mid_range() const { return 0.5 * (lower() + upper()); }
  JointVector clamp(const JointVector& q) const { return q.cwiseMax(lower()).cwiseMin(upper()); }
  bool within_limits(const JointVector& q, double tol = 1e-12) const {
    for (int i = 0; i < kNumJoints; ++i)
      if (q[i] < joints[i].lower - tol || q[i] > joints[i].upper + tol) return false;
    return true;
  }
  bool collision_disabled(const std::string& a, const std::string& b) const {
    for (const auto& [x, y] : disabled_collisions)
      if ((x == a && y == b) || (x == b && y == a)) return true;
    return false;
  }

  void validate() const {
    for (const auto& j : joints) {
      if (!(j.lower < j.upper)) throw std::invalid_argument("joint " + j.name + ": lower must be < upper");
      if (!(j.max_velocity > 0.0)) throw std::invalid_argument("joint " + j.name + ": max_velocity must be > 0");
      if (j.axis.norm() < 1e-9) throw std::invalid_argument("joint " + j.name + ": zero axis");
    }
    for (const auto& c : capsules) {
      if (c.frame < 0 || c.frame > kNumJoints) throw std::invalid_argument("capsule " + c.name + ": bad frame");
      if (!(c.radius > 0.0)) throw std::invalid_argument("capsule " + c.name + ": radius must be > 0");
    }
    if (!within_limits(ready)) throw std::invalid_argument("ready configuration outside joint limits");
  }
};

struct JointState {
  JointVector q = JointVector::Zero();
  double gripper = 1.0;  // aperture, 0 = closed
  double stamp = 0.0;
};

/// Cartesian velocity command. Linear part in base_link; angular part
/// expressed in the tcp frame (keyboard yaw rotates about tcp z).
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  bool is_zero() const { return linear.isZero(0.0) && angular.isZero(0.0); }
  bool operator==(const Twist&) const = default;
};

/// Default 6R arm, 0.9 m shoulder-to-wrist reach plus a 0.2 m tool.
///
/// Joint 1 yaws about base z, joints 2-3 pitch in the arm plane, joints 4-6
/// form a spherical wrist. At q = 0 the upper arm is vertical, the forearm
/// points along +y and the flange points down, so the tcp sits at
/// (0, 0.45, 0.55) with its z axis along -z of base_link: the top-grasp pose.
///
/// Limits keep the arm on one elbow/wrist branch and clear of the elbow
/// (q3 = pi/2) and wrist (q5 = +-pi/2) singularities; shoulder_lift only leans
/// forward so the wrist never crosses the pan axis.
inline ArmModel default_arm_model() {
  ArmModel m;
  m.name = "desk6r";
  auto joint = [](std::string name, Vec3 xyz, Vec3 axis, double lo, double hi, double vmax) {
    Joint j;
    j.name = std::move(name);
    j.origin = Pose(xyz, Quat::Identity());
    j.axis = axis;
    j.lower = lo;
    j.upper = hi;
    j.max_velocity = vmax;
    return j;
  };
  m.joints[0] = joint("shoulder_pan", {0, 0, 0.30}, Vec3::UnitZ(), -1.6, 1.6, 1.0);
  m.joints[1] = joint("shoulder_lift", {0, 0, 0}, Vec3::UnitX(), -1.5, 0.0, 1.0);
  m.joints[2] = joint("elbow", {0, 0, 0.45}, Vec3::UnitX(), -1.0, 1.2, 1.0);
  m.joints[3] = joint("forearm_roll", {0, 0.45, 0}, Vec3::UnitY(), -1.0, 1.0, 1.5);
  m.joints[4] = joint("wrist_pitch", {0, 0, 0}, Vec3::UnitX(), -1.3, 1.3, 1.5);
  m.joints[5] = joint("wrist_roll", {0, 0, -0.08}, Vec3::UnitZ(), -1.6, 1.6, 1.5);
  m.tool = Pose({0, 0, -0.12}, Quat(Eigen::AngleAxisd(kPi, Vec3::UnitX())));
  m.capsules = {
      {"base", 0, {0, 0, 0.08}, {0, 0, 0.26}, 0.06},
      {"upper_arm", 2, {0, 0, 0.0}, {0, 0, 0.45}, 0.05},
      {"forearm", 3, {0, 0.05, 0}, {0, 0.45, 0}, 0.04},
      {"wrist", 5, {0, 0, 0}, {0, 0, -0.08}, 0.04},
      {"gripper", 6, {0, 0, 0}, {0, 0, -0.09}, 0.025},
  };
  m.disabled_collisions = {
      {"base", "upper_arm"}, {"upper_arm", "forearm"}, {"forearm", "wrist"}, {"wrist", "gripper"}};
  // tcp at (0, 0.70, 0.15) pointing down, away from every singularity
  m.ready << 0.0, -0.822995, 0.217946, 0.0, 0.605018, 0.0;
  return m;
}

// --- model file ----------------------------------------------------------

inline constexpr int kArmModelSchemaVersion = 1;

namespace detail {
inline Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
inline nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

/// Pose as {"xyz": [..], "quat": [w, x, y, z]} or {"xyz": [..], "rpy": [..]}.
inline Pose pose_from_json(const nlohmann::json& j) {
  Pose p;
  if (j.contains("xyz")) p.position = vec3_from_json(j.at("xyz"));
  if (j.contains("quat")) {
    const auto& q = j.at("quat");
    if (!q.is_array() || q.size() != 4) throw std::invalid_argument("quat must be [w, x, y, z]");
    Quat quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    if (std::abs(quat.norm() - 1.0) > 1e-6) throw std::invalid_argument("quat must be unit-norm");
    p.orientation = quat.normalized();
  } else if (j.contains("rpy")) {
    Vec3 rpy = vec3_from_json(j.at("rpy"));
    p.orientation = quat_from_rpy(rpy.x(), rpy.y(), rpy.z());
  }
  return p;
}
inline nlohmann::json pose_to_json(const Pose& p) {
  const Quat& q = p.orientation;
  return {{"xyz", vec3_to_json(p.position)}, {"quat", {q.w(), q.x(), q.y(), q.z()}}};
}
}  // namespace detail

inline ArmModel arm_model_from_json(const nlohmann::json& j) {
  if (j.value("schema", 0) != kArmModelSchemaVersion)
    throw std::invalid_argument("arm model: unsupported schema version");
  ArmModel m;
  m.name = j.value("name", "arm");
  const auto& joints = j.at("joints");
  if (!joints.is_array() || joints.size() != kNumJoints)
    throw std::invalid_argument("arm model: exactly 6 joints required");
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& jj = joints[i];
    Joint& out = m.joints[i];
    out.name = jj.at("name").get<std::string>();
    out.origin = detail::pose_from_json(jj.at("origin"));
    out.axis = detail::vec3_from_json(jj.at("axis")).normalized();
    out.lower = jj.at("limits").at(0).get<double>();
    out.upper = jj.at("limits").at(1).get<double>();
    out.max_velocity = jj.at("max_velocity").get<double>();
  }
  m.tool = detail::pose_from_json(j.at("tool"));
  for (const auto& c : j.value("capsules", nlohmann::json::array())) {
    m.capsules.push_back({c.at("name").get<std::string>(), c.at("frame").get<int>(),
                          detail::vec3_from_json(c.at("a")), detail::vec3_from_json(c.at("b")),
                          c.at("radius").get<double>()});
  }
  for (const auto& p : j.value("disabled_collisions", nlohmann::json::array()))
    m.disabled_collisions.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  if (j.contains("ready")) {
    const auto& r = j.at("ready");
    if (r.size() != kNumJoints) throw std::invalid_argument("arm model: ready needs 6 values");
    for (int i = 0; i < kNumJoints; ++i) m.ready[i] = r[i].get<double>();
  }
  if (j.contains("gripper")) {
    m.gripper_travel_time = j.at("gripper").value("travel_time", m.gripper_travel_time);
    m.gripper_max_opening = j.at("gripper").value("max_opening", m.gripper_max_opening);
  }
  m.validate();
  return m;
}

inline nlohmann::json arm_model_to_json(const ArmModel& m) {
  nlohmann::json j;
  j["schema"] = kArmModelSchemaVersion;
  j["name"] = m.name;
  for (const auto& jt : m.joints) {
    j["joints"].push_back({{"name", jt.name},
                           {"origin", detail::pose_to_json(jt.origin)},
                           {"axis", detail::vec3_to_json(jt.axis)},
                           {"limits", {jt.lower, jt.upper}},
                           {"max_velocity", jt.max_velocity}});
  }
  j["tool"] = detail::pose_to_json(m.tool);
  for (const auto& c : m.capsules) {
    j["capsules"].push_back({{"name", c.name},
                             {"frame", c.frame},
                             {"a", detail::vec3_to_json(c.a)},
                             {"b", detail::vec3_to_json(c.b)},
                             {"radius", c.radius}});
  }
  j["disabled_collisions"] = nlohmann::json::array();
  for (const auto& [a, b] : m.disabled_collisions) j["disabled_collisions"].push_back({a, b});
  j["ready"] = std::vector<double>(m.ready.data(), m.ready.data() + kNumJoints);
  j["gripper"] = {{"travel_time", m.gripper_travel_time}, {"max_opening", m.gripper_max_opening}};
  return j;
}

inline ArmModel load_arm_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open arm model " + path);
  return arm_model_from_json(nlohmann::json::parse(in));
}

}  // namespace lasertele
