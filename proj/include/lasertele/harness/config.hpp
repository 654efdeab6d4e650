#pragma once

// Main run configuration. Every timing, tolerance and speed parameter of the
// stack lives here with its default; unknown keys are schema errors.

#include "lasertele/control/controller.hpp"
#include "lasertele/planning/planner.hpp"
#include "lasertele/scene/render.hpp"
#include "lasertele/scene/world.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>

namespace lasertele {

struct ImuOptions {
  double gain = 0.15;        // (m/s) per rad beyond the deadband
  double deadband = 0.05;    // rad
  double toggle_roll = 0.35; // rad, lateral flexion threshold
  double toggle_hold = 1.0;  // s
  double max_speed = 0.025;  // m/s per axis
};

struct Config {
  double tick_rate = 30.0;  // Hz
  ControlOptions control;
  PerceptionOptions perception;
  double body_padding = 0.01;
  RenderOptions render;
  CollisionOptions collision;
  PlannerOptions planner;
  WorldOptions world;
  double approach_offset = 0.01; // m, tcp goal height above a selected surface point
  double place_lift = 0.005;     // m, gap left under a placed object
  double attached_skin = 0.01;   // m, shrink of a held object's planning sphere
  ImuOptions imu;

  double dt() const { return 1.0 / tick_rate; }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string("config: ") + what + " must be > 0");
    };
    positive(tick_rate, "tick_rate");
    positive(control.env_dwell, "control.env_dwell_s");
    positive(control.env_radius, "control.env_radius_m");
    positive(control.button_dwell, "control.button_dwell_s");
    positive(control.linear_speed, "control.linear_speed");
    positive(control.angular_speed, "control.angular_speed");
    if (!(perception.smoother.alpha > 0.0 && perception.smoother.alpha <= 1.0))
      throw std::invalid_argument("config: perception.ema_alpha must be in (0, 1]");
    if (perception.smoother.max_misses < 1) throw std::invalid_argument("config: perception.max_misses must be >= 1");
    if (perception.detector != "chroma" && perception.detector != "external")
      throw std::invalid_argument("config: perception.detector must be \"chroma\" or \"external\"");
    if (perception.workspace.volume() <= 0.0) throw std::invalid_argument("config: perception.workspace is empty");
    positive(render.laser_sigma_px, "render.laser_sigma_px");
    positive(collision.voxel_size, "planning.voxel_size");
    positive(planner.step, "planning.step");
    positive(planner.edge_resolution, "planning.edge_resolution");
    positive(planner.clearance, "planning.clearance");
    if (planner.max_samples < 1) throw std::invalid_argument("config: planning.max_samples must be >= 1");
    positive(world.grasp_radius, "world.grasp_radius");
    positive(imu.toggle_hold, "imu.toggle_hold_s");
    positive(imu.max_speed, "imu.max_speed");
  }
};

namespace detail {

/// Reads optional keys from one JSON object and rejects any it did not read.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
  }
  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(where_ + "." + key + ": wrong type");
    }
  }
  const nlohmann::json* section(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw std::invalid_argument(where_ + ": unknown key '" + k + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline constexpr int kConfigSchemaVersion = 1;

inline Config config_from_json(const nlohmann::json& j) {
  Config c;
  detail::StrictObject root(j, "config");
  int schema = kConfigSchemaVersion;
  root.get("schema", schema);
  if (schema != kConfigSchemaVersion) throw std::invalid_argument("config: unsupported schema version");
  root.get("tick_rate", c.tick_rate);
  if (auto* s = root.section("control")) {
    detail::StrictObject o(*s, "config.control");
    o.get("env_dwell_s", c.control.env_dwell);
    o.get("env_radius_m", c.control.env_radius);
    o.get("button_dwell_s", c.control.button_dwell);
    o.get("linear_speed", c.control.linear_speed);
    o.get("angular_speed", c.control.angular_speed);
    o.get("plane_tolerance", c.control.plane_tolerance);
    o.finish();
  }
  if (auto* s = root.section("perception")) {
    detail::StrictObject o(*s, "config.perception");
    o.get("detector", c.perception.detector);
    o.get("external_path", c.perception.external_path);
    o.get("chroma_threshold", c.perception.chroma_threshold);
    o.get("ema_alpha", c.perception.smoother.alpha);
    o.get("max_misses", c.perception.smoother.max_misses);
    o.get("body_padding", c.body_padding);
    if (auto* w = o.section("workspace")) c.perception.workspace = detail::aabb_from_json(*w);
    o.finish();
  }
  if (auto* s = root.section("render")) {
    detail::StrictObject o(*s, "config.render");
    o.get("laser_sigma_px", c.render.laser_sigma_px);
    o.finish();
  }
  if (auto* s = root.section("planning")) {
    detail::StrictObject o(*s, "config.planning");
    o.get("voxel_size", c.collision.voxel_size);
    o.get("voxel_margin", c.collision.voxel_margin);
    o.get("step", c.planner.step);
    o.get("max_samples", c.planner.max_samples);
    o.get("shortcut_attempts", c.planner.shortcut_attempts);
    o.get("ik_restarts", c.planner.ik_restarts);
    o.get("edge_resolution", c.planner.edge_resolution);
    o.get("clearance", c.planner.clearance);
    o.get("goal_clear_radius", c.planner.goal_clear_radius);
    o.finish();
  }
  if (auto* s = root.section("world")) {
    detail::StrictObject o(*s, "config.world");
    o.get("grasp_radius", c.world.grasp_radius);
    o.get("grip_stiffness", c.world.grip_stiffness);
    o.get("approach_offset", c.approach_offset);
    o.get("place_lift", c.place_lift);
    o.get("attached_skin", c.attached_skin);
    o.finish();
  }
  if (auto* s = root.section("imu")) {
    detail::StrictObject o(*s, "config.imu");
    o.get("gain", c.imu.gain);
    o.get("deadband", c.imu.deadband);
    o.get("toggle_roll", c.imu.toggle_roll);
    o.get("toggle_hold_s", c.imu.toggle_hold);
    o.get("max_speed", c.imu.max_speed);
    o.finish();
  }
  root.finish();
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const Config& c) {
  return {
      {"schema", kConfigSchemaVersion},
      {"tick_rate", c.tick_rate},
      {"control",
       {{"env_dwell_s", c.control.env_dwell},
        {"env_radius_m", c.control.env_radius},
        {"button_dwell_s", c.control.button_dwell},
        {"linear_speed", c.control.linear_speed},
        {"angular_speed", c.control.angular_speed},
        {"plane_tolerance", c.control.plane_tolerance}}},
      {"perception",
       {{"detector", c.perception.detector},
        {"external_path", c.perception.external_path},
        {"chroma_threshold", c.perception.chroma_threshold},
        {"ema_alpha", c.perception.smoother.alpha},
        {"max_misses", c.perception.smoother.max_misses},
        {"body_padding", c.body_padding},
        {"workspace", detail::aabb_to_json(c.perception.workspace)}}},
      {"render", {{"laser_sigma_px", c.render.laser_sigma_px}}},
      {"planning",
       {{"voxel_size", c.collision.voxel_size},
        {"voxel_margin", c.collision.voxel_margin},
        {"step", c.planner.step},
        {"max_samples", c.planner.max_samples},
        {"shortcut_attempts", c.planner.shortcut_attempts},
        {"ik_restarts", c.planner.ik_restarts},
        {"edge_resolution", c.planner.edge_resolution},
        {"clearance", c.planner.clearance},
        {"goal_clear_radius", c.planner.goal_clear_radius}}},
      {"world",
       {{"grasp_radius", c.world.grasp_radius},
        {"grip_stiffness", c.world.grip_stiffness},
        {"approach_offset", c.approach_offset},
        {"place_lift", c.place_lift},
        {"attached_skin", c.attached_skin}}},
      {"imu",
       {{"gain", c.imu.gain},
        {"deadband", c.imu.deadband},
        {"toggle_roll", c.imu.toggle_roll},
        {"toggle_hold_s", c.imu.toggle_hold},
        {"max_speed", c.imu.max_speed}}},
  };
}

}  // namespace lasertele
