#pragma once

// Scenario files: scene and model references, a scripted head/laser input
// track, named targets and success checks.

#include "lasertele/harness/config.hpp"
#include "lasertele/harness/imu_baseline.hpp"
#include "lasertele/scene/defaults.hpp"

#include <filesystem>
#include <fstream>

#ifndef LASERTELE_DATA_DIR
#define LASERTELE_DATA_DIR "data"
#endif

namespace lasertele {

/// Head pose driving the laser: origin at the head, beam along the head x axis.
struct HeadInput {
  Vec3 position = default_head_position();
  Quat orientation = Quat::Identity();
  bool laser_on = false;

  LaserRay ray() const { return {position, orientation * Vec3::UnitX(), laser_on}; }
};

/// Resolved keyframe. `linear` interpolates from the previous keyframe to
/// this one; otherwise the previous keyframe holds until this time.
struct HeadKey {
  double t = 0.0;
  Vec3 position = default_head_position();
  Vec3 rpy = Vec3::Zero();  // roll, pitch, yaw (ZYX); positive pitch looks down
  bool on = true;
  bool linear = false;
};

inline Quat head_orientation(const Vec3& rpy) { return quat_from_rpy(rpy.x(), rpy.y(), rpy.z()); }

/// Roll-free head angles whose x axis points along `dir`.
inline Vec3 rpy_toward(const Vec3& dir, double roll = 0.0) {
  Vec3 d = dir.normalized();
  return {roll, std::asin(std::clamp(-d.z(), -1.0, 1.0)), std::atan2(d.y(), d.x())};
}

class HeadScript {
 public:
  HeadScript() = default;
  explicit HeadScript(std::vector<HeadKey> keys) : keys_(std::move(keys)) {
    for (std::size_t i = 1; i < keys_.size(); ++i)
      if (keys_[i].t < keys_[i - 1].t) throw std::invalid_argument("script: keyframe times must be nondecreasing");
  }
  const std::vector<HeadKey>& keys() const { return keys_; }
  bool empty() const { return keys_.empty(); }

  /// Before the first keyframe the head rests at that keyframe with the laser off.
  HeadInput sample(double t) const {
    HeadInput in;
    if (keys_.empty()) return in;
    auto next = std::upper_bound(keys_.begin(), keys_.end(), t, [](double x, const HeadKey& k) { return x < k.t; });
    if (next == keys_.begin()) {
      in.position = keys_.front().position;
      in.orientation = head_orientation(keys_.front().rpy);
      return in;
    }
    const HeadKey& a = *(next - 1);
    Vec3 pos = a.position, rpy = a.rpy;
    if (next != keys_.end() && next->linear && next->t > a.t) {
      double s = (t - a.t) / (next->t - a.t);
      pos += s * (next->position - a.position);
      rpy += s * (next->rpy - a.rpy);
    }
    in.position = pos;
    in.orientation = head_orientation(rpy);
    in.laser_on = a.on;
    return in;
  }

 private:
  std::vector<HeadKey> keys_;
};

struct Target {
  std::string name;
  Vec3 point = Vec3::Zero();
  double radius = 0.03;
};

enum class ControllerKind { Laser, Imu };

struct Scenario {
  std::string name;
  ControllerKind controller = ControllerKind::Laser;
  std::uint64_t seed = 1;
  double duration = 10.0;
  bool stop_on_success = false;
  bool live = false;
  HeadScript script;
  std::vector<Target> targets;
  nlohmann::json checks = nlohmann::json::array();
  std::optional<Quat> imu_neutral;  // default: the head orientation at t = 0
};

/// Everything a run needs, fully resolved.
struct RunSpec {
  Scenario scenario;
  Scene scene;
  ArmModel model;
  KeyboardLayout layout;
  Config config;
  nlohmann::json source;  // scenario file as written
};

namespace detail {

inline std::filesystem::path resolve_ref(const std::string& ref, const std::filesystem::path& base) {
  namespace fs = std::filesystem;
  fs::path p(ref);
  if (p.is_absolute()) return p;
  for (const fs::path& dir : {base, fs::path(LASERTELE_DATA_DIR), base / "..", base / ".." / "data"})
    if (fs::exists(dir / p)) return dir / p;
  throw std::runtime_error("cannot resolve file reference '" + ref + "' (looked next to the scenario and in " +
                           LASERTELE_DATA_DIR + ")");
}

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

/// Top-center of a named object: the point a laser aimed "at the object" hits.
inline Vec3 object_top(const Scene& scene, const std::string& name) {
  const SceneObject* o = scene.find_object(name);
  if (!o) throw std::invalid_argument("script: unknown object '" + name + "'");
  return o->pose.position + Vec3(0, 0, o->half_height_z());
}

inline HeadKey parse_key(const nlohmann::json& k, const HeadKey& prev, const Scene& scene, const KeyboardLayout& layout,
                         const std::vector<Target>& targets) {
  static const std::set<std::string> known = {"t", "on", "interp", "head", "rpy", "roll", "aim", "aim_object",
                                              "aim_button", "aim_target", "ray"};
  for (const auto& [key, v] : k.items())
    if (!known.count(key)) throw std::invalid_argument("script: unknown keyframe key '" + key + "'");
  HeadKey h = prev;
  h.t = k.at("t").get<double>();
  h.on = k.value("on", true);
  std::string interp = k.value("interp", "step");
  if (interp != "step" && interp != "linear") throw std::invalid_argument("script: interp must be step or linear");
  h.linear = interp == "linear";
  if (k.contains("head")) h.position = detail::vec3_from_json(k.at("head"));
  double roll = k.value("roll", 0.0);
  int aims = int(k.contains("rpy")) + k.contains("aim") + k.contains("aim_object") + k.contains("aim_button") +
             k.contains("aim_target") + k.contains("ray");
  if (aims > 1) throw std::invalid_argument("script: at most one of rpy/aim/aim_object/aim_button/aim_target/ray");
  std::optional<Vec3> aim;
  if (k.contains("rpy")) h.rpy = detail::vec3_from_json(k.at("rpy"));
  if (k.contains("aim")) aim = detail::vec3_from_json(k.at("aim"));
  if (k.contains("aim_object")) aim = object_top(scene, k.at("aim_object").get<std::string>());
  if (k.contains("aim_button")) {
    int b = layout.find(k.at("aim_button").get<std::string>());
    if (b < 0) throw std::invalid_argument("script: unknown button '" + k.at("aim_button").get<std::string>() + "'");
    aim = layout.button_center(b);
  }
  if (k.contains("aim_target")) {
    std::string name = k.at("aim_target").get<std::string>();
    auto it = std::find_if(targets.begin(), targets.end(), [&](const Target& t) { return t.name == name; });
    if (it == targets.end()) throw std::invalid_argument("script: unknown target '" + name + "'");
    aim = it->point;
  }
  if (k.contains("ray")) {
    h.position = detail::vec3_from_json(k.at("ray").at("origin"));
    Vec3 d = detail::vec3_from_json(k.at("ray").at("direction"));
    if (d.norm() < 1e-12) throw std::invalid_argument("script: zero ray direction");
    h.rpy = rpy_toward(d, roll);
  }
  if (aim) h.rpy = rpy_toward(*aim - h.position, roll);
  else if (k.contains("roll") && !k.contains("rpy")) h.rpy.x() = roll;
  return h;
}

}  // namespace detail

inline constexpr int kScenarioSchemaVersion = 1;

/// Parses a scenario and loads everything it references. `base` is the
/// directory references are resolved against.
inline RunSpec make_run_spec(const nlohmann::json& j, const std::filesystem::path& base) {
  using detail::resolve_ref;
  static const std::set<std::string> known = {"schema", "name",  "scene",   "arm_model", "keyboard_layout",
                                              "config", "controller", "seed", "duration_s", "stop_on_success",
                                              "input",  "targets", "success", "imu_neutral_rpy", "description"};
  for (const auto& [key, v] : j.items())
    if (!known.count(key)) throw std::invalid_argument("scenario: unknown key '" + key + "'");
  if (j.value("schema", 0) != kScenarioSchemaVersion) throw std::invalid_argument("scenario: unsupported schema version");

  RunSpec spec;
  spec.source = j;
  Scenario& sc = spec.scenario;
  sc.name = j.value("name", "scenario");
  spec.scene = j.contains("scene") ? load_scene(resolve_ref(j.at("scene").get<std::string>(), base)) : default_scene();
  spec.scene.validate();
  spec.model = j.contains("arm_model") ? load_arm_model(resolve_ref(j.at("arm_model").get<std::string>(), base).string())
                                       : default_arm_model();
  spec.model.validate();
  Pose kb_pose = spec.scene.keyboard ? spec.scene.keyboard->pose : Pose();
  std::vector<Button> buttons = default_buttons();
  if (j.contains("keyboard_layout"))
    buttons = load_buttons(resolve_ref(j.at("keyboard_layout").get<std::string>(), base).string());
  else if (spec.scene.keyboard && !spec.scene.keyboard->layout_ref.empty())
    buttons = load_buttons(resolve_ref(spec.scene.keyboard->layout_ref, base).string());
  spec.layout = make_layout(kb_pose, buttons);
  spec.config = config_from_json(j.value("config", nlohmann::json::object()));

  std::string ctl = j.value("controller", "laser");
  if (ctl != "laser" && ctl != "imu") throw std::invalid_argument("scenario: controller must be laser or imu");
  sc.controller = ctl == "imu" ? ControllerKind::Imu : ControllerKind::Laser;
  sc.seed = j.value("seed", std::uint64_t(1));
  sc.duration = j.at("duration_s").get<double>();
  if (!(sc.duration > 0.0)) throw std::invalid_argument("scenario: duration_s must be > 0");
  sc.stop_on_success = j.value("stop_on_success", false);
  if (j.contains("imu_neutral_rpy")) sc.imu_neutral = head_orientation(detail::vec3_from_json(j.at("imu_neutral_rpy")));

  for (const auto& t : j.value("targets", nlohmann::json::array())) {
    Target tg;
    tg.name = t.at("name").get<std::string>();
    if (t.contains("object")) tg.point = detail::object_top(spec.scene, t.at("object").get<std::string>());
    else tg.point = detail::vec3_from_json(t.at("point"));
    tg.radius = t.value("radius", 0.03);
    if (!(tg.radius > 0.0)) throw std::invalid_argument("scenario: target radius must be > 0");
    sc.targets.push_back(tg);
  }

  const nlohmann::json input = j.value("input", nlohmann::json{{"type", "scripted"}, {"keyframes", nlohmann::json::array()}});
  std::string type = input.value("type", "scripted");
  if (type == "live") {
    sc.live = true;
  } else if (type == "scripted") {
    std::vector<HeadKey> keys;
    HeadKey prev;
    for (const auto& k : input.value("keyframes", nlohmann::json::array())) {
      prev = detail::parse_key(k, prev, spec.scene, spec.layout, sc.targets);
      keys.push_back(prev);
    }
    sc.script = HeadScript(std::move(keys));
  } else {
    throw std::invalid_argument("scenario: input.type must be scripted or live");
  }
  sc.checks = j.value("success", nlohmann::json::array());
  if (!sc.checks.is_array()) throw std::invalid_argument("scenario: success must be a list");
  return spec;
}

inline RunSpec load_run_spec(const std::filesystem::path& path) {
  try {
    return make_run_spec(detail::read_json_file(path), path.parent_path());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace lasertele
