#pragma once

#include "lasertele/kinematics/arm_model.hpp"

#include <array>
#include <optional>
#include <vector>

namespace lasertele {

/// Frame poses along the chain: [0] = base_link, [k] = after joint k,
/// [kNumJoints + 1] = tcp.
using ChainFrames = std::array<Pose, kNumJoints + 2>;

inline ChainFrames chain_frames(const ArmModel& model, const JointVector& q) {
  ChainFrames f;
  f[0] = Pose();
  for (int i = 0; i < kNumJoints; ++i) {
    const Joint& j = model.joints[i];
    Pose rot(Vec3::Zero(), Quat(Eigen::AngleAxisd(q[i], j.axis)));
    f[i + 1] = f[i] * j.origin * rot;
  }
  f[kNumJoints + 1] = f[kNumJoints] * model.tool;
  f[kNumJoints + 1].orientation.normalize();
  return f;
}

inline Pose fk(const ArmModel& model, const JointVector& q) { return chain_frames(model, q).back(); }

/// Geometric Jacobian of the tcp in base_link: rows 0-2 linear, 3-5 angular.
inline Jacobian jacobian(const ArmModel& model, const JointVector& q) {
  ChainFrames f = chain_frames(model, q);
  const Vec3& tcp = f.back().position;
  Jacobian jac;
  for (int i = 0; i < kNumJoints; ++i) {
    // Joint i rotates about its axis expressed in the frame after the joint,
    // which is the same vector in the pre-rotation frame.
    Vec3 axis = f[i + 1].orientation * model.joints[i].axis;
    Vec3 origin = f[i + 1].position;
    jac.block<3, 1>(0, i) = axis.cross(tcp - origin);
    jac.block<3, 1>(3, i) = axis;
  }
  return jac;
}

/// sqrt(det(J J^T)).
inline double manipulability(const Jacobian& jac) {
  double d = (jac * jac.transpose()).determinant();
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

inline JointVector damped_least_squares(const Jacobian& jac, const Eigen::Matrix<double, 6, 1>& v, double lambda) {
  Eigen::Matrix<double, 6, 6> a = jac * jac.transpose();
  a.diagonal().array() += lambda * lambda;
  return jac.transpose() * a.ldlt().solve(v);
}

/// Link collision capsules in base_link for configuration q.
inline std::vector<Capsule> arm_capsules(const ArmModel& model, const JointVector& q) {
  ChainFrames f = chain_frames(model, q);
  std::vector<Capsule> out;
  out.reserve(model.capsules.size());
  for (const auto& c : model.capsules) out.push_back({f[c.frame].apply(c.a), f[c.frame].apply(c.b), c.radius});
  return out;
}

/// Pose error [position; rotation vector] taking `current` to `target`.
inline Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_vector(target.rotation() * current.rotation().transpose());
  return e;
}

struct IkOptions {
  double damping = 0.05;
  double max_step = 0.2;  // rad, per iteration (max-norm)
  int max_iterations = 200;
  double position_tolerance = 1e-4;
  double orientation_tolerance = 1e-3;
};

struct IkResult {
  JointVector q;
  int iterations = 0;
};

/// Damped least-squares IK. Returns nullopt when not converged within the
/// iteration budget (unreachable or limit-blocked target).
inline std::optional<IkResult> ik(const ArmModel& model, const Pose& target, const JointVector& seed,
                                  const IkOptions& opt = {}) {
  JointVector q = model.clamp(seed);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    Eigen::Matrix<double, 6, 1> e = pose_error(target, fk(model, q));
    if (e.head<3>().norm() < opt.position_tolerance && e.tail<3>().norm() < opt.orientation_tolerance)
      return IkResult{q, it};
    if (it == opt.max_iterations) break;
    JointVector dq = damped_least_squares(jacobian(model, q), e, opt.damping);
    double m = dq.cwiseAbs().maxCoeff();
    if (m > opt.max_step) dq *= opt.max_step / m;
    q = model.clamp(q + dq);
  }
  return std::nullopt;
}

inline std::optional<IkResult> ik(const ArmModel& model, const Pose& target, const JointState& seed,
                                  const IkOptions& opt = {}) {
  return ik(model, target, seed.q, opt);
}

struct VelocityOptions {
  double damping = 0.05;
  double min_manipulability = 1e-4;
};

/// Joint velocity realizing `twist` at q: DLS on [linear; R_tcp * angular],
/// zero near singularities, uniformly scaled into the joint velocity limits.
inline JointVector twist_to_joint_velocity(const ArmModel& model, const JointVector& q, const Twist& twist,
                                           const VelocityOptions& opt = {}) {
  if (twist.is_zero()) return JointVector::Zero();
  Jacobian jac = jacobian(model, q);
  if (manipulability(jac) < opt.min_manipulability) return JointVector::Zero();
  Eigen::Matrix<double, 6, 1> v;
  v.head<3>() = twist.linear;
  v.tail<3>() = fk(model, q).orientation * twist.angular;
  JointVector qd = damped_least_squares(jac, v, opt.damping);
  double scale = 1.0;
  JointVector vmax = model.max_velocity();
  for (int i = 0; i < kNumJoints; ++i)
    if (std::abs(qd[i]) > vmax[i]) scale = std::min(scale, vmax[i] / std::abs(qd[i]));
  return qd * scale;
}

/// One tick of Cartesian velocity control; result clamped to position limits.
inline JointVector integrate_velocity(const ArmModel& model, const JointVector& q, const Twist& twist, double dt,
                                      const VelocityOptions& opt = {}) {
  return model.clamp(q + twist_to_joint_velocity(model, q, twist, opt) * dt);
}

}  // namespace lasertele
