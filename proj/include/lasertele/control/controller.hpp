#pragma once

#include "lasertele/control/keyboard.hpp"
#include "lasertele/perception/pipeline.hpp"
#include "lasertele/planning/planner.hpp"

#include <string>
#include <variant>
#include <vector>

namespace lasertele {

// --- regions --------------------------------------------------------------

enum class RegionKind { Outside, Environment, Keyboard };

struct Region {
  RegionKind kind = RegionKind::Outside;
  int button = -1;  // index into the layout when kind == Keyboard
  bool operator==(const Region&) const = default;
};

inline std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Outside: return "Outside";
    case RegionKind::Environment: return "Environment";
    case RegionKind::Keyboard: return "Keyboard";
  }
  return "?";
}

inline Region classify(const LaserEstimate& est, const KeyboardLayout& layout, const WorkspaceBounds& bounds,
                       double plane_tolerance = 0.02) {
  if (!est.valid) return {};
  Vec3 local = layout.pose.apply_inverse(est.point_base);
  if (std::abs(local.z()) < plane_tolerance)
    for (int i = 0; i < int(layout.buttons.size()); ++i)
      if (layout.buttons[i].contains(local.x(), local.y())) return {RegionKind::Keyboard, i};
  if (bounds.box.contains(est.point_base)) return {RegionKind::Environment, -1};
  return {};
}

// --- commands ---------------------------------------------------------------

struct GoalPoseCommand {
  Pose pose;
  bool operator==(const GoalPoseCommand& o) const {
    return pose.position == o.pose.position && pose.orientation.coeffs() == o.pose.orientation.coeffs();
  }
};
struct VelocityCommand {
  Twist twist;
  bool operator==(const VelocityCommand&) const = default;
};
struct GripperActionCommand {
  bool close = true;
  bool operator==(const GripperActionCommand&) const = default;
};
struct StopCommand {
  bool operator==(const StopCommand&) const = default;
};

using RobotCommand = std::variant<GoalPoseCommand, VelocityCommand, GripperActionCommand, StopCommand>;

inline std::string command_name(const RobotCommand& c) {
  switch (c.index()) {
    case 0: return "GoalPose";
    case 1: return "CartesianVelocity";
    case 2: return "Gripper";
    default: return "Stop";
  }
}

// --- state machine ----------------------------------------------------------

enum class Mode { Idle, DwellEnv, DwellButton, ButtonHeld, ExecutingTrajectory, GripperActing };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Idle: return "Idle";
    case Mode::DwellEnv: return "DwellEnv";
    case Mode::DwellButton: return "DwellButton";
    case Mode::ButtonHeld: return "ButtonHeld";
    case Mode::ExecutingTrajectory: return "ExecutingTrajectory";
    case Mode::GripperActing: return "GripperActing";
  }
  return "?";
}

struct ControlOptions {
  double env_dwell = 3.0;        // s
  double env_radius = 0.04;      // m
  double button_dwell = 1.0;     // s
  double linear_speed = 0.025;   // m/s
  double angular_speed = 0.25;   // rad/s
  double plane_tolerance = 0.02; // m
  double time_epsilon = 1e-9;
};

struct DwellState {
  bool active = false;
  Vec3 anchor = Vec3::Zero();
  double entered_at = 0.0;
  double required = 0.0;
  double radius = 0.0;  // 0 for buttons (rect membership instead)
  double progress = 0.0;

  double progress_at(double now) const { return std::clamp((now - entered_at) / required, 0.0, 1.0); }
};

enum class Feedback { TrajectoryDone, GoalRejected, GripperDone };

struct ControlEvent {
  std::string type;    // dwell_started, dwell_reset, goal_selected, button_triggered, ...
  std::string detail;
};

struct ControllerState {
  Mode mode = Mode::Idle;
  int button = -1;  // button of DwellButton / ButtonHeld
  DwellState env;   // environment dwell (also runs while a trajectory executes)
  DwellState key;   // keyboard dwell
  int key_button = -1;
  bool env_armed = true;          // false after a goal until the laser leaves the anchor radius
  int latched_button = -1;        // gripper button awaiting exit before it can fire again
  bool executing = false;         // a trajectory is in flight
  bool gripper_acting = false;
  std::optional<RobotCommand> pending;  // second half of a preemption

  /// Dwell shown to the user: the keyboard one when running, else the environment one.
  const DwellState& active_dwell() const { return key.active ? key : env; }
};

struct UpdateResult {
  std::optional<RobotCommand> command;
  std::vector<ControlEvent> events;
};

class Controller {
 public:
  Controller(KeyboardLayout layout, ControlOptions opt = {}) : layout_(std::move(layout)), opt_(opt) {}

  const KeyboardLayout& layout() const { return layout_; }
  const ControlOptions& options() const { return opt_; }

  Region classify(const LaserEstimate& est, const WorkspaceBounds& bounds) const {
    return lasertele::classify(est, layout_, bounds, opt_.plane_tolerance);
  }

  /// Executor feedback, applied before the next update.
  void notify(ControllerState& s, Feedback f, std::vector<ControlEvent>* events = nullptr) const {
    auto emit = [&](std::string type) {
      if (events) events->push_back({std::move(type), ""});
    };
    switch (f) {
      case Feedback::TrajectoryDone:
      case Feedback::GoalRejected:
        emit(f == Feedback::TrajectoryDone ? "trajectory_done" : "goal_rejected");
        s.executing = false;
        if (s.mode == Mode::ExecutingTrajectory) s.mode = Mode::Idle;
        break;
      case Feedback::GripperDone:
        emit("gripper_done");
        s.gripper_acting = false;
        if (s.mode == Mode::GripperActing) s.mode = Mode::Idle;
        break;
    }
  }

  /// One tick. At most one command; commands are only produced by the mode
  /// owning the laser's region or by a completed dwell.
  UpdateResult update(ControllerState& s, const Region& region, const LaserEstimate& est, double now) const {
    UpdateResult out;
    auto event = [&](std::string type, std::string detail = "") { out.events.push_back({std::move(type), std::move(detail)}); };

    if (s.pending) {
      out.command = std::move(s.pending);
      s.pending.reset();
    }

    // Leaving the keyboard clears its dwell and gripper latch.
    if (region.kind != RegionKind::Keyboard || (s.key_button >= 0 && region.button != s.key_button)) {
      if (s.key.active) event("dwell_reset", "keyboard");
      s.key.active = false;
      s.key_button = -1;
    }
    if (region.kind != RegionKind::Keyboard || region.button != s.latched_button) s.latched_button = -1;

    // A held button is released as soon as the laser is elsewhere.
    if (s.mode == Mode::ButtonHeld && !(region.kind == RegionKind::Keyboard && region.button == s.button)) {
      if (!out.command) out.command = StopCommand{};
      else s.pending = StopCommand{};
      event("button_released", layout_.buttons[s.button].id);
      s.mode = Mode::Idle;
      s.button = -1;
    }

    // Environment dwell bookkeeping.
    if (region.kind == RegionKind::Environment) {
      const Vec3& p = est.point_base;
      if (!s.env_armed && (p - s.env.anchor).norm() > opt_.env_radius) s.env_armed = true;
      if (s.env.active && (p - s.env.anchor).norm() > opt_.env_radius) {
        s.env.active = false;
        event("dwell_reset", "environment");
      } else if (!s.env.active && s.env_armed) {
        s.env = DwellState{true, p, now, opt_.env_dwell, opt_.env_radius, 0.0};
        event("dwell_started", "environment");
      }
    } else {
      if (s.env.active) event("dwell_reset", "environment");
      s.env.active = false;
      s.env_armed = true;
    }
    if (s.env.active) s.env.progress = s.env.progress_at(now + opt_.time_epsilon);

    if (region.kind == RegionKind::Keyboard) {
      const Button& b = layout_.buttons[region.button];
      if (s.mode == Mode::ButtonHeld && s.button == region.button) {
        if (!out.command) out.command = VelocityCommand{button_twist(b.action, opt_.linear_speed, opt_.angular_speed)};
      } else if (s.latched_button != region.button) {
        if (!s.key.active) {
          s.key = DwellState{true, est.point_base, now, opt_.button_dwell, 0.0, 0.0};
          s.key_button = region.button;
          event("dwell_started", b.id);
        }
        s.key.progress = s.key.progress_at(now + opt_.time_epsilon);
        if (s.key.progress >= 1.0 && !out.command) fire_button(s, region.button, out, event);
      }
    }

    if (s.env.active && s.env.progress >= 1.0 && !out.command) {
      Pose goal(est.point_base, top_grasp_orientation(est.point_base));
      out.command = GoalPoseCommand{goal};
      event(s.executing ? "goal_replaced" : "goal_selected");
      s.env.active = false;
      s.env_armed = false;
      s.executing = true;
      s.mode = Mode::ExecutingTrajectory;
    }

    // Mode reflects the owner of the laser when nothing longer-lived is running.
    if (s.mode != Mode::ButtonHeld) {
      if (s.executing) s.mode = Mode::ExecutingTrajectory;
      else if (s.key.active) s.mode = Mode::DwellButton, s.button = s.key_button;
      else if (s.gripper_acting) s.mode = Mode::GripperActing;
      else if (s.env.active) s.mode = Mode::DwellEnv;
      else s.mode = Mode::Idle;
      if (s.mode != Mode::DwellButton) s.button = -1;
    }
    return out;
  }

 private:
  template <typename Event>
  void fire_button(ControllerState& s, int id, UpdateResult& out, Event& event) const {
    const Button& b = layout_.buttons[id];
    RobotCommand cmd;
    if (is_gripper_action(b.action)) {
      cmd = GripperActionCommand{b.action == ButtonAction::GripClose};
      s.latched_button = id;
      s.gripper_acting = true;
    } else {
      cmd = VelocityCommand{button_twist(b.action, opt_.linear_speed, opt_.angular_speed)};
    }
    event("button_triggered", b.id);
    s.key.active = false;
    s.key_button = -1;
    if (s.executing) {
      // Stop the trajectory this tick, deliver the button next tick.
      out.command = StopCommand{};
      s.pending = cmd;
      s.executing = false;
      event("preempted", "trajectory");
    } else {
      out.command = cmd;
    }
    // The environment dwell does not survive a keyboard action.
    s.env.active = false;
    if (is_gripper_action(b.action)) {
      s.mode = Mode::GripperActing;
    } else {
      s.mode = Mode::ButtonHeld;
      s.button = id;
    }
  }

  KeyboardLayout layout_;
  ControlOptions opt_;
};

}  // namespace lasertele
