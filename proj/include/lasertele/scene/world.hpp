#pragma once

#include "lasertele/kinematics/kinematics.hpp"
#include "lasertele/scene/raycast.hpp"

#include <optional>

namespace lasertele {

enum class GripperCommand { None, Open, Close };

struct WorldOptions {
  double grasp_radius = 0.03;      // object center to tcp, m
  double grip_stiffness = 400.0;   // N/m of squeeze interference
};

/// Mutable simulation state owned by the tick loop.
struct SimState {
  Scene scene;
  JointState joints;
  double gripper_target = 1.0;  // 0 closed, 1 open
  std::optional<std::size_t> attached;  // index into scene.objects
  Pose attached_offset;                 // object pose in the tcp frame
  double effort = 0.0;                  // N
};

inline SimState make_sim_state(Scene scene, const ArmModel& model) {
  SimState s;
  s.scene = std::move(scene);
  s.joints.q = model.ready;
  s.joints.gripper = 1.0;
  return s;
}

/// Aperture at which the gripper fingers touch `o`.
inline double contact_aperture(const ArmModel& model, const SceneObject& o) {
  return std::clamp(o.grip_width() / model.gripper_max_opening, 0.0, 1.0);
}

/// Lets an object fall straight down until it rests on the highest support
/// below its top face (static boxes, keyboard, floor, other objects).
inline void drop_to_support(Scene& scene, std::size_t index) {
  SceneObject& o = scene.objects[index];
  double hz = o.half_height_z();
  Ray r{o.pose.position + Vec3(0, 0, hz), -Vec3::UnitZ()};
  auto hit = nearest_hit(r, static_surfaces(scene));
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (i == index) continue;
    auto t = geom::intersect(r, object_primitive(scene.objects[i]));
    if (t && (!hit || *t < hit->t)) hit = RayHit{*t, r.at(*t), {}};
  }
  if (hit) o.pose.position.z() = hit->point.z() + hz;
}

/// One fixed tick: integrate joints (clamped), move the gripper toward its
/// target, attach or release objects and carry the attached one with the tcp.
inline void step(SimState& s, const ArmModel& model, const JointVector& qdot, GripperCommand cmd, double dt,
                 const WorldOptions& opt = {}) {
  if (cmd == GripperCommand::Close) s.gripper_target = 0.0;
  if (cmd == GripperCommand::Open) {
    s.gripper_target = 1.0;
    if (s.attached) {
      std::size_t i = *s.attached;
      s.attached.reset();
      drop_to_support(s.scene, i);
    }
  }

  s.joints.q = model.clamp(s.joints.q + qdot * dt);
  s.joints.stamp += dt;

  double rate = dt / model.gripper_travel_time;
  double& a = s.joints.gripper;
  a = (s.gripper_target > a) ? std::min(s.gripper_target, a + rate) : std::max(s.gripper_target, a - rate);

  Pose tcp = fk(model, s.joints.q);
  s.effort = 0.0;
  if (s.gripper_target == 0.0) {
    if (!s.attached) {
      std::optional<std::size_t> best;
      double best_d = opt.grasp_radius;
      for (std::size_t i = 0; i < s.scene.objects.size(); ++i) {
        const SceneObject& o = s.scene.objects[i];
        if (!o.graspable) continue;
        double d = (o.pose.position - tcp.position).norm();
        if (d <= best_d) best = i, best_d = d;
      }
      if (best && a <= contact_aperture(model, s.scene.objects[*best])) {
        s.attached = best;
        s.attached_offset = tcp.inverse() * s.scene.objects[*best].pose;
      }
    }
    if (s.attached) {
      double contact = contact_aperture(model, s.scene.objects[*s.attached]);
      a = std::max(a, contact);
      s.effort = opt.grip_stiffness * (contact - s.gripper_target) * model.gripper_max_opening;
    }
  }
  if (s.attached) s.scene.objects[*s.attached].pose = tcp * s.attached_offset;
}

}  // namespace lasertele
