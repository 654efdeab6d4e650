#pragma once

// WebSocket wire schema: JSON text frames, every message carries "type" and
// "schema". Units are m, rad, s; frames are base_link.

#include "lasertele/harness/session.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <variant>

namespace lasertele::wire {

inline constexpr int kSchemaVersion = 1;

/// Direction norm accepted as unit.
inline constexpr double kUnitTolerance = 1e-6;

struct Hello {
  std::string role = "control";  // "control" or "observe"
};

struct PointerRay {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  // unit norm
  bool on = true;
};

struct HeadOrientation {
  Quat orientation = Quat::Identity();  // unit quaternion, head x axis is the beam
};

enum class ControlAction { Start, Pause, Reset, Load };

struct SessionControl {
  ControlAction action = ControlAction::Start;
  std::string scenario;  // Load only: scenario id
};

using InputMessage = std::variant<Hello, PointerRay, HeadOrientation, SessionControl>;

/// Schema violation; the text is sent back to the client verbatim.
struct SchemaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::string to_string(ControlAction a) {
  switch (a) {
    case ControlAction::Start: return "start";
    case ControlAction::Pause: return "pause";
    case ControlAction::Reset: return "reset";
    case ControlAction::Load: return "load";
  }
  return "?";
}

namespace detail {

inline void require_fields(const nlohmann::json& j, const std::string& type, const std::set<std::string>& required,
                           const std::set<std::string>& optional = {}) {
  for (const auto& [k, v] : j.items())
    if (k != "type" && k != "schema" && !required.count(k) && !optional.count(k))
      throw SchemaError(type + ": unknown field '" + k + "'");
  for (const auto& k : required)
    if (!j.contains(k)) throw SchemaError(type + ": missing field '" + k + "'");
}

inline Vec3 vec3(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(where + ": expected [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw SchemaError(where + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw SchemaError(where + ": not finite");
  return v;
}

inline nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
inline nlohmann::json quat_json(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

}  // namespace detail

/// Parses one client text frame. Throws SchemaError with a diagnostic.
inline InputMessage parse_input(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("message must be a JSON object");
  if (!j.contains("schema") || !j["schema"].is_number_integer())
    throw SchemaError("missing integer field 'schema'");
  if (j["schema"].get<int>() != kSchemaVersion)
    throw SchemaError("unsupported schema " + std::to_string(j["schema"].get<int>()) + ", server speaks " +
                      std::to_string(kSchemaVersion));
  if (!j.contains("type") || !j["type"].is_string()) throw SchemaError("missing string field 'type'");
  std::string type = j["type"].get<std::string>();

  if (type == "hello") {
    detail::require_fields(j, type, {}, {"role"});
    Hello h;
    if (j.contains("role")) {
      if (!j["role"].is_string()) throw SchemaError("hello: role must be a string");
      h.role = j["role"].get<std::string>();
    }
    if (h.role != "control" && h.role != "observe") throw SchemaError("hello: role must be control or observe");
    return h;
  }
  if (type == "pointer_ray") {
    detail::require_fields(j, type, {"origin", "direction"}, {"on"});
    PointerRay p;
    p.origin = detail::vec3(j["origin"], "pointer_ray.origin");
    p.direction = detail::vec3(j["direction"], "pointer_ray.direction");
    if (std::abs(p.direction.norm() - 1.0) > kUnitTolerance) throw SchemaError("pointer_ray.direction must be unit norm");
    if (j.contains("on")) {
      if (!j["on"].is_boolean()) throw SchemaError("pointer_ray.on must be a boolean");
      p.on = j["on"].get<bool>();
    }
    return p;
  }
  if (type == "head_orientation") {
    detail::require_fields(j, type, {"quaternion"});
    const auto& q = j["quaternion"];
    if (!q.is_array() || q.size() != 4) throw SchemaError("head_orientation.quaternion: expected [w, x, y, z]");
    std::array<double, 4> c;
    for (int i = 0; i < 4; ++i) {
      if (!q[i].is_number()) throw SchemaError("head_orientation.quaternion: expected numbers");
      c[i] = q[i].get<double>();
    }
    Quat o(c[0], c[1], c[2], c[3]);
    if (!o.coeffs().allFinite() || std::abs(o.norm() - 1.0) > kUnitTolerance)
      throw SchemaError("head_orientation.quaternion must be unit norm");
    return HeadOrientation{o};
  }
  if (type == "session_control") {
    detail::require_fields(j, type, {"action"}, {"scenario"});
    if (!j["action"].is_string()) throw SchemaError("session_control.action must be a string");
    std::string a = j["action"].get<std::string>();
    SessionControl c;
    if (a == "start") c.action = ControlAction::Start;
    else if (a == "pause") c.action = ControlAction::Pause;
    else if (a == "reset") c.action = ControlAction::Reset;
    else if (a == "load") c.action = ControlAction::Load;
    else throw SchemaError("session_control.action must be start, pause, reset or load");
    if (c.action == ControlAction::Load) {
      if (!j.contains("scenario") || !j["scenario"].is_string()) throw SchemaError("session_control load: missing 'scenario'");
      c.scenario = j["scenario"].get<std::string>();
      if (c.scenario.empty() || c.scenario.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                                    std::string::npos)
        throw SchemaError("session_control load: scenario id must match [A-Za-z0-9_-]+");
    } else if (j.contains("scenario")) {
      throw SchemaError("session_control: 'scenario' only applies to load");
    }
    return c;
  }
  throw SchemaError("unknown message type '" + type + "'");
}

inline std::string serialize(const InputMessage& m) {
  nlohmann::json j{{"schema", kSchemaVersion}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j["type"] = "hello", j["role"] = v.role;
        } else if constexpr (std::is_same_v<T, PointerRay>) {
          j["type"] = "pointer_ray", j["origin"] = detail::vec3_json(v.origin),
          j["direction"] = detail::vec3_json(v.direction), j["on"] = v.on;
        } else if constexpr (std::is_same_v<T, HeadOrientation>) {
          j["type"] = "head_orientation", j["quaternion"] = detail::quat_json(v.orientation);
        } else {
          j["type"] = "session_control", j["action"] = to_string(v.action);
          if (v.action == ControlAction::Load) j["scenario"] = v.scenario;
        }
      },
      m);
  return j.dump();
}

inline std::string welcome(const std::string& role, const std::string& scenario, double tick_rate) {
  return nlohmann::json{{"type", "welcome"}, {"schema", kSchemaVersion}, {"role", role},
                        {"scenario", scenario}, {"tick_rate", tick_rate}}
      .dump();
}

inline std::string error(const std::string& message) {
  return nlohmann::json{{"type", "error"}, {"schema", kSchemaVersion}, {"message", message}}.dump();
}

/// Per-tick state pushed to every client.
struct StateSnapshot {
  int epoch = 0;  // bumped by reset and load; time is monotone within an epoch
  int tick = 0;
  double t = 0.0;
  bool running = false;
  std::string scenario;
  Pose tcp;
  JointVector q = JointVector::Zero();
  double gripper = 1.0;
  bool laser_valid = false;
  Vec3 laser = Vec3::Zero();
  std::string region = "Outside";
  std::string mode = "Idle";
  double dwell_progress = 0.0;
  std::string active_button;  // empty when none
  std::vector<std::pair<std::string, Pose>> objects;
  std::optional<EventRecord> last_event;
};

inline StateSnapshot make_snapshot(const TickRow& row, const Session& session, const std::optional<EventRecord>& last,
                                   bool running, const std::string& scenario) {
  StateSnapshot s;
  s.tick = row.tick;
  s.t = row.t;
  s.running = running;
  s.scenario = scenario;
  s.tcp = row.tcp;
  s.q = row.joints.q;
  s.gripper = row.joints.gripper;
  s.laser_valid = row.estimate.valid;
  s.laser = row.estimate.point_base;
  s.region = to_string(row.region.kind);
  s.mode = to_string(row.mode);
  s.dwell_progress = row.dwell_progress;
  const ControllerState& cs = session.controller_state();
  int b = cs.button >= 0 ? cs.button : (cs.key.active ? cs.key_button : -1);
  const auto& buttons = session.controller().layout().buttons;
  if (b >= 0 && b < int(buttons.size())) s.active_button = buttons[b].id;
  const Scene& scene = session.sim().scene;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    Pose p = scene.objects[i].pose;
    if (i < row.objects.size()) p.position = row.objects[i];
    s.objects.push_back({scene.objects[i].name, p});
  }
  s.last_event = last;
  return s;
}

inline nlohmann::json pose_json(const Pose& p) {
  return {{"xyz", detail::vec3_json(p.position)}, {"quat", detail::quat_json(p.orientation)}};
}

inline std::string serialize(const StateSnapshot& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& [name, pose] : s.objects) objects.push_back({{"name", name}, {"pose", pose_json(pose)}});
  nlohmann::json q = nlohmann::json::array();
  for (int i = 0; i < kNumJoints; ++i) q.push_back(s.q[i]);
  nlohmann::json j{{"type", "snapshot"},
                   {"schema", kSchemaVersion},
                   {"epoch", s.epoch},
                   {"tick", s.tick},
                   {"t", s.t},
                   {"running", s.running},
                   {"scenario", s.scenario},
                   {"tcp", pose_json(s.tcp)},
                   {"joints", q},
                   {"gripper", s.gripper},
                   {"laser", {{"valid", s.laser_valid}, {"point", detail::vec3_json(s.laser)}, {"region", s.region}}},
                   {"mode", s.mode},
                   {"dwell_progress", s.dwell_progress},
                   {"active_button", s.active_button.empty() ? nlohmann::json() : nlohmann::json(s.active_button)},
                   {"objects", objects}};
  j["last_event"] = s.last_event ? nlohmann::json{{"tick", s.last_event->tick},
                                                  {"t", s.last_event->t},
                                                  {"type", s.last_event->type},
                                                  {"detail", s.last_event->detail}}
                                 : nlohmann::json();
  return j.dump();
}

}  // namespace lasertele::wire
