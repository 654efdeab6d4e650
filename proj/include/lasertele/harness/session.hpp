#pragma once

// The fixed-tick loop: head input -> laser -> render -> perception ->
// controller -> executor -> simulation. One Session owns all mutable state;
// a tick is a pure function of that state and the tick's HeadInput.

#include "lasertele/harness/scenario.hpp"

namespace lasertele {

struct EventRecord {
  int tick = 0;
  double t = 0.0;
  std::string type;
  std::string detail;
};

/// One row per tick. State columns are sampled before the simulation step,
/// i.e. they show what the camera saw at time t.
struct TickRow {
  int tick = 0;
  double t = 0.0;
  HeadInput input;
  std::optional<Vec3> laser_truth;
  LaserEstimate estimate;
  Region region;
  Mode mode = Mode::Idle;
  double dwell_progress = 0.0;
  std::optional<RobotCommand> command;
  JointState joints;
  Pose tcp;
  double effort = 0.0;
  int attached = -1;
  std::vector<Vec3> objects;
};

class Session {
 public:
  explicit Session(const RunSpec& spec)
      : spec_(spec),
        sim_(make_sim_state(spec.scene, spec.model)),
        renderer_(spec.scene, spec.config.render),
        perception_(spec.scene.camera, spec.config.perception),
        controller_(spec.layout, spec.config.control),
        imu_(spec.config.imu) {
    imu_.set_neutral(spec.scenario.imu_neutral.value_or(spec.scenario.script.sample(0.0).orientation));
  }

  const RunSpec& spec() const { return spec_; }
  const SimState& sim() const { return sim_; }
  const ControllerState& controller_state() const { return cs_; }
  const Controller& controller() const { return controller_; }
  const ImuBaseline& imu() const { return imu_; }
  int tick_index() const { return tick_; }
  double now() const { return tick_ * spec_.config.dt(); }
  bool trajectory_active() const { return traj_.has_value(); }

  /// Advances one tick; appends this tick's events to `events`.
  TickRow tick(const HeadInput& in, std::vector<EventRecord>& events) {
    const double dt = spec_.config.dt();
    const double t = now();
    auto emit = [&](const std::string& type, const std::string& detail = "") {
      events.push_back({tick_, t, type, detail});
    };

    // Executor feedback from the previous step.
    std::vector<ControlEvent> fb;
    if (traj_done_) {
      controller_.notify(cs_, Feedback::TrajectoryDone, &fb);
      traj_done_ = false;
    }
    if (gripper_done_at_ && t >= *gripper_done_at_ - 1e-9) {
      controller_.notify(cs_, Feedback::GripperDone, &fb);
      gripper_done_at_.reset();
    }
    for (const auto& e : fb) emit(e.type, e.detail);

    TickRow row;
    row.tick = tick_;
    row.t = t;
    row.input = in;
    const ArmModel& model = spec_.model;
    auto caps = arm_capsules(model, sim_.joints.q);
    row.laser_truth = cast_laser(sim_.scene, in.ray(), caps);
    CameraFrame frame = renderer_.render(sim_.scene, caps, row.laser_truth, t);
    std::optional<SceneObject> held;
    if (sim_.attached) held = sim_.scene.objects[*sim_.attached];
    WorkspaceBounds bounds = workspace_bounds(spec_.config.perception.workspace, model, sim_.joints.q, held);
    bounds.body_padding = spec_.config.body_padding;
    row.estimate = perception_.process(frame, bounds);

    std::optional<RobotCommand> cmd;
    if (spec_.scenario.controller == ControllerKind::Laser) {
      row.region = controller_.classify(row.estimate, bounds);
      UpdateResult r = controller_.update(cs_, row.region, row.estimate, t);
      for (const auto& e : r.events) emit(e.type, e.detail);
      cmd = r.command;
    } else {
      bool toggled = false;
      Twist tw = imu_.update(in.orientation, t, &toggled);
      if (toggled) emit("plane_toggled", to_string(imu_.plane()));
      if (!tw.is_zero()) {
        if (!imu_moving_) emit("motion_started");
        imu_moving_ = true;
        cmd = VelocityCommand{tw};
      } else if (imu_moving_) {
        imu_moving_ = false;
        emit("motion_stopped");
        cmd = StopCommand{};
      }
    }

    JointVector qdot = JointVector::Zero();
    GripperCommand grip = GripperCommand::None;
    if (cmd) {
      if (auto* g = std::get_if<GoalPoseCommand>(&*cmd)) {
        execute_goal(*g, frame, bounds, t, emit);
      } else if (auto* v = std::get_if<VelocityCommand>(&*cmd)) {
        traj_.reset();
        qdot = (integrate_velocity(model, sim_.joints.q, v->twist, dt) - sim_.joints.q) / dt;
      } else if (auto* gr = std::get_if<GripperActionCommand>(&*cmd)) {
        grip = gr->close ? GripperCommand::Close : GripperCommand::Open;
        gripper_done_at_ = t + model.gripper_travel_time;
      } else {
        traj_.reset();
      }
    }
    if (traj_) {
      double rel = t + dt - traj_start_;
      qdot = (traj_->sample(rel) - sim_.joints.q) / dt;
      if (rel >= traj_->duration()) {
        traj_.reset();
        traj_done_ = true;
      }
    }

    row.mode = spec_.scenario.controller == ControllerKind::Laser ? cs_.mode
               : imu_moving_                                   ? Mode::ButtonHeld
                                                               : Mode::Idle;
    row.dwell_progress = cs_.active_dwell().active ? cs_.active_dwell().progress : 0.0;
    row.command = cmd;
    row.joints = sim_.joints;
    row.joints.stamp = t;
    row.tcp = fk(model, sim_.joints.q);
    row.effort = sim_.effort;
    row.attached = sim_.attached ? int(*sim_.attached) : -1;
    for (const auto& o : sim_.scene.objects) row.objects.push_back(o.pose.position);

    bool was_attached = sim_.attached.has_value();
    step(sim_, model, qdot, grip, dt, spec_.config.world);
    if (!was_attached && sim_.attached) emit("object_attached", sim_.scene.objects[*sim_.attached].name);
    if (was_attached && !sim_.attached) emit("object_released", sim_.scene.objects[row.attached].name);
    ++tick_;
    return row;
  }

 private:
  template <typename Emit>
  void execute_goal(const GoalPoseCommand& g, const CameraFrame& frame, const WorkspaceBounds& bounds, double t,
                    Emit& emit) {
    const Config& cfg = spec_.config;
    Pose goal = g.pose;
    ArmModel planning_model = spec_.model;
    std::vector<Capsule> clear;
    if (sim_.attached) {
      // Aim point is where the held object should come to rest.
      const SceneObject& o = sim_.scene.objects[*sim_.attached];
      Pose tcp = fk(spec_.model, sim_.joints.q);
      goal.position.head<2>() += tcp.position.head<2>() - o.pose.position.head<2>();
      goal.position.z() += tcp.position.z() - o.pose.position.z() + o.half_height_z() + cfg.place_lift;
      planning_model = with_attached_object(spec_.model, o, sim_.attached_offset, cfg.attached_skin);
      clear.push_back({o.pose.position, o.pose.position, o.bounding_radius()});
    } else {
      goal.position.z() += cfg.approach_offset;
    }
    CameraFrame filtered = filter_workspace(frame, spec_.scene.camera, bounds);
    CollisionWorld world = build_world(sim_.scene, filtered, planning_model, sim_.joints.q, cfg.collision, clear);
    PlannerOptions opt = cfg.planner;
    opt.seed = spec_.scenario.seed * 1000003ULL + std::uint64_t(goals_++);
    auto result = plan(world, sim_.joints.q, goal, opt);
    if (auto* traj = std::get_if<Trajectory>(&result)) {
      traj_ = std::move(*traj);
      traj_start_ = t;
      std::ostringstream os;
      os.precision(17);
      os << "duration=" << traj_->duration() << " waypoints=" << traj_->waypoints.size();
      emit("plan_succeeded", os.str());
      if (traj_->waypoints.size() < 2) {
        traj_.reset();
        traj_done_ = true;
      }
    } else {
      traj_.reset();
      std::vector<ControlEvent> fb;
      controller_.notify(cs_, Feedback::GoalRejected, &fb);
      emit("plan_failed", to_string(std::get<PlanError>(result)));
      for (const auto& e : fb) emit(e.type, e.detail);
    }
  }

  RunSpec spec_;
  SimState sim_;
  Renderer renderer_;
  PerceptionPipeline perception_;
  Controller controller_;
  ControllerState cs_;
  ImuBaseline imu_;
  bool imu_moving_ = false;
  std::optional<Trajectory> traj_;
  double traj_start_ = 0.0;
  bool traj_done_ = false;
  std::optional<double> gripper_done_at_;
  int goals_ = 0;
  int tick_ = 0;
};

}  // namespace lasertele
