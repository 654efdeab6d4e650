#pragma once

// Run recordings: <stem>.jsonl (header, events, summary) and <stem>.csv (one
// numeric row per tick, %.17g so values round-trip exactly). The header
// embeds the resolved scene, arm model, layout and config, so a recording is
// replayable without the files it was produced from.

#include "lasertele/harness/session.hpp"

#include <cstdio>
#include <sstream>

namespace lasertele {

inline constexpr int kRecordingSchemaVersion = 1;

struct Recording {
  nlohmann::json header;
  std::vector<std::string> object_names;
  std::vector<TickRow> rows;
  std::vector<EventRecord> events;
  nlohmann::json summary = nlohmann::json::object();
};

inline nlohmann::json scenario_to_json(const Scenario& sc, const Quat& imu_neutral) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : sc.targets) targets.push_back({{"name", t.name}, {"point", detail::vec3_to_json(t.point)}, {"radius", t.radius}});
  return {{"name", sc.name},
          {"controller", sc.controller == ControllerKind::Imu ? "imu" : "laser"},
          {"seed", sc.seed},
          {"duration_s", sc.duration},
          {"stop_on_success", sc.stop_on_success},
          {"targets", targets},
          {"success", sc.checks},
          {"imu_neutral_quat", {imu_neutral.w(), imu_neutral.x(), imu_neutral.y(), imu_neutral.z()}}};
}

inline nlohmann::json recording_header(const RunSpec& spec) {
  Quat neutral = spec.scenario.imu_neutral.value_or(spec.scenario.script.sample(0.0).orientation);
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : spec.scene.objects) objects.push_back(o.name);
  return {{"kind", "header"},
          {"schema", kRecordingSchemaVersion},
          {"scenario", scenario_to_json(spec.scenario, neutral)},
          {"source", spec.source},
          {"config", config_to_json(spec.config)},
          {"scene", scene_to_json(spec.scene)},
          {"arm_model", arm_model_to_json(spec.model)},
          {"keyboard", {{"pose", detail::pose_to_json(spec.layout.pose)}, {"layout", buttons_to_json(spec.layout.buttons)}}},
          {"objects", objects}};
}

/// RunSpec rebuilt from a recording header (no script: replay supplies inputs).
inline RunSpec spec_from_header(const nlohmann::json& h) {
  if (h.value("schema", 0) != kRecordingSchemaVersion) throw std::invalid_argument("recording: unsupported schema version");
  RunSpec spec;
  spec.source = h.value("source", nlohmann::json::object());
  spec.scene = scene_from_json(h.at("scene"));
  spec.model = arm_model_from_json(h.at("arm_model"));
  spec.layout = make_layout(detail::pose_from_json(h.at("keyboard").at("pose")), buttons_from_json(h.at("keyboard").at("layout")));
  spec.config = config_from_json(h.at("config"));
  const auto& s = h.at("scenario");
  Scenario& sc = spec.scenario;
  sc.name = s.at("name").get<std::string>();
  sc.controller = s.at("controller").get<std::string>() == "imu" ? ControllerKind::Imu : ControllerKind::Laser;
  sc.seed = s.at("seed").get<std::uint64_t>();
  sc.duration = s.at("duration_s").get<double>();
  sc.stop_on_success = s.at("stop_on_success").get<bool>();
  for (const auto& t : s.at("targets"))
    sc.targets.push_back({t.at("name").get<std::string>(), detail::vec3_from_json(t.at("point")), t.at("radius").get<double>()});
  sc.checks = s.at("success");
  const auto& q = s.at("imu_neutral_quat");
  Quat n;
  n.w() = q.at(0).get<double>(), n.x() = q.at(1).get<double>(), n.y() = q.at(2).get<double>(), n.z() = q.at(3).get<double>();
  sc.imu_neutral = n;
  return spec;
}

// --- CSV -------------------------------------------------------------------

namespace detail {

inline Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::Idle, Mode::DwellEnv, Mode::DwellButton, Mode::ButtonHeld, Mode::ExecutingTrajectory,
                 Mode::GripperActing})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("recording: unknown mode '" + s + "'");
}

inline RegionKind region_from_string(const std::string& s) {
  for (RegionKind k : {RegionKind::Outside, RegionKind::Environment, RegionKind::Keyboard})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("recording: unknown region '" + s + "'");
}

inline void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace detail

inline std::vector<std::string> csv_columns(const std::vector<std::string>& objects) {
  std::vector<std::string> c = {"tick",   "t",       "head_x",  "head_y",  "head_z",  "head_qw", "head_qx", "head_qy",
                                "head_qz", "laser_on", "truth_valid", "truth_x", "truth_y", "truth_z", "est_valid",
                                "est_x",  "est_y",   "est_z",   "est_u",   "est_v",   "region",  "button",  "mode",
                                "dwell_progress", "command", "cmd_0", "cmd_1", "cmd_2", "cmd_3", "cmd_4", "cmd_5",
                                "cmd_6",  "q1",      "q2",      "q3",      "q4",      "q5",      "q6",      "gripper",
                                "tcp_x",  "tcp_y",   "tcp_z",   "tcp_qw",  "tcp_qx",  "tcp_qy",  "tcp_qz",  "effort",
                                "attached"};
  for (const auto& o : objects)
    for (const char* a : {"_x", "_y", "_z"}) c.push_back(o + a);
  return c;
}

inline std::string csv_row(const TickRow& r) {
  std::string s;
  auto num = [&](double v) {
    detail::put(s, v);
    s += ',';
  };
  auto text = [&](const std::string& v) {
    s += v;
    s += ',';
  };
  auto vec = [&](const Vec3& v) { num(v.x()), num(v.y()), num(v.z()); };
  auto quat = [&](const Quat& q) { num(q.w()), num(q.x()), num(q.y()), num(q.z()); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  num(r.tick);
  num(r.t);
  vec(r.input.position);
  quat(r.input.orientation);
  num(r.input.laser_on);
  num(r.laser_truth.has_value());
  vec(r.laser_truth.value_or(Vec3::Constant(nan)));
  num(r.estimate.valid);
  vec(r.estimate.valid ? r.estimate.point_base : Vec3::Constant(nan));
  num(r.estimate.valid ? r.estimate.pixel.u : nan);
  num(r.estimate.valid ? r.estimate.pixel.v : nan);
  text(to_string(r.region.kind));
  num(r.region.button);
  text(to_string(r.mode));
  num(r.dwell_progress);
  std::array<double, 7> c;
  c.fill(0.0);
  if (r.command) {
    text(command_name(*r.command));
    if (auto* g = std::get_if<GoalPoseCommand>(&*r.command))
      c = {g->pose.position.x(), g->pose.position.y(), g->pose.position.z(), g->pose.orientation.w(),
           g->pose.orientation.x(), g->pose.orientation.y(), g->pose.orientation.z()};
    else if (auto* v = std::get_if<VelocityCommand>(&*r.command))
      c = {v->twist.linear.x(), v->twist.linear.y(), v->twist.linear.z(), v->twist.angular.x(), v->twist.angular.y(),
           v->twist.angular.z(), 0.0};
    else if (auto* g2 = std::get_if<GripperActionCommand>(&*r.command))
      c[0] = g2->close;
  } else {
    text("None");
  }
  for (double v : c) num(v);
  for (int i = 0; i < kNumJoints; ++i) num(r.joints.q[i]);
  num(r.joints.gripper);
  vec(r.tcp.position);
  quat(r.tcp.orientation);
  num(r.effort);
  num(r.attached);
  for (const auto& o : r.objects) vec(o);
  s.back() = '\n';
  return s;
}

inline TickRow parse_csv_row(const std::string& line, std::size_t n_objects) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (f.size() != csv_columns(std::vector<std::string>(n_objects)).size())
    throw std::invalid_argument("recording: wrong column count");
  std::size_t i = 0;
  auto num = [&]() { return std::strtod(f.at(i++).c_str(), nullptr); };
  auto vec = [&]() {
    double x = num(), y = num(), z = num();
    return Vec3(x, y, z);
  };
  auto quat = [&]() {
    double w = num(), x = num(), y = num(), z = num();
    Quat q;
    q.w() = w, q.x() = x, q.y() = y, q.z() = z;  // stored verbatim, no renormalization
    return q;
  };
  TickRow r;
  r.tick = int(num());
  r.t = num();
  r.input.position = vec();
  r.input.orientation = quat();
  r.input.laser_on = num() != 0.0;
  bool truth = num() != 0.0;
  Vec3 tp = vec();
  if (truth) r.laser_truth = tp;
  r.estimate.valid = num() != 0.0;
  Vec3 ep = vec();
  double u = num(), v = num();
  if (r.estimate.valid) r.estimate.point_base = ep, r.estimate.pixel.u = u, r.estimate.pixel.v = v;
  r.estimate.stamp = r.t;
  r.region.kind = detail::region_from_string(f.at(i++));
  r.region.button = int(num());
  r.mode = detail::mode_from_string(f.at(i++));
  r.dwell_progress = num();
  std::string cmd = f.at(i++);
  std::array<double, 7> c;
  for (double& x : c) x = num();
  if (cmd == "GoalPose") {
    Pose p;
    p.position = {c[0], c[1], c[2]};
    p.orientation.w() = c[3], p.orientation.x() = c[4], p.orientation.y() = c[5], p.orientation.z() = c[6];
    r.command = GoalPoseCommand{p};
  } else if (cmd == "CartesianVelocity") {
    r.command = VelocityCommand{Twist{{c[0], c[1], c[2]}, {c[3], c[4], c[5]}}};
  } else if (cmd == "Gripper") {
    r.command = GripperActionCommand{c[0] != 0.0};
  } else if (cmd == "Stop") {
    r.command = StopCommand{};
  } else if (cmd != "None") {
    throw std::invalid_argument("recording: unknown command '" + cmd + "'");
  }
  for (int k = 0; k < kNumJoints; ++k) r.joints.q[k] = num();
  r.joints.gripper = num();
  r.joints.stamp = r.t;
  r.tcp.position = vec();
  r.tcp.orientation = quat();
  r.effort = num();
  r.attached = int(num());
  for (std::size_t k = 0; k < n_objects; ++k) r.objects.push_back(vec());
  return r;
}

inline std::string recording_csv(const Recording& rec) {
  std::string out;
  auto cols = csv_columns(rec.object_names);
  for (std::size_t i = 0; i < cols.size(); ++i) out += cols[i] + (i + 1 < cols.size() ? "," : "\n");
  for (const auto& r : rec.rows) out += csv_row(r);
  return out;
}

inline std::string recording_jsonl(const Recording& rec) {
  std::string out = rec.header.dump() + "\n";
  for (const auto& e : rec.events)
    out += nlohmann::json{{"kind", "event"}, {"tick", e.tick}, {"t", e.t}, {"type", e.type}, {"detail", e.detail}}.dump() + "\n";
  nlohmann::json s = rec.summary;
  s["kind"] = "summary";
  out += s.dump() + "\n";
  return out;
}

/// Writes <dir>/<stem>.jsonl and <dir>/<stem>.csv; returns the .jsonl path.
inline std::filesystem::path write_recording(const Recording& rec, const std::filesystem::path& dir,
                                             const std::string& stem = "run") {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
  };
  std::filesystem::path jsonl = dir / (stem + ".jsonl");
  write(jsonl, recording_jsonl(rec));
  write(dir / (stem + ".csv"), recording_csv(rec));
  return jsonl;
}

/// Accepts the .jsonl path, the .csv path, or a directory holding run.jsonl.
inline Recording read_recording(std::filesystem::path path) {
  if (std::filesystem::is_directory(path)) path /= "run.jsonl";
  if (path.extension() == ".csv") path.replace_extension(".jsonl");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open recording " + path.string());
  Recording rec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    std::string kind = j.value("kind", "");
    if (kind == "header") rec.header = j;
    else if (kind == "event")
      rec.events.push_back({j.at("tick").get<int>(), j.at("t").get<double>(), j.at("type").get<std::string>(),
                            j.at("detail").get<std::string>()});
    else if (kind == "summary") rec.summary = j;
    else throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unknown record kind");
  }
  if (rec.header.is_null()) throw std::runtime_error(path.string() + ": missing header");
  if (rec.header.value("schema", 0) != kRecordingSchemaVersion)
    throw std::runtime_error(path.string() + ": unsupported recording schema");
  rec.summary.erase("kind");
  for (const auto& o : rec.header.at("objects")) rec.object_names.push_back(o.get<std::string>());

  std::filesystem::path csv = path;
  csv.replace_extension(".csv");
  std::ifstream cin(csv);
  if (!cin) throw std::runtime_error("cannot open recording table " + csv.string());
  std::getline(cin, line);
  auto cols = csv_columns(rec.object_names);
  std::string expect;
  for (std::size_t i = 0; i < cols.size(); ++i) expect += cols[i] + (i + 1 < cols.size() ? "," : "");
  if (line != expect) throw std::runtime_error(csv.string() + ": unexpected column header");
  lineno = 1;
  while (std::getline(cin, line)) {
    ++lineno;
    try {
      rec.rows.push_back(parse_csv_row(line, rec.object_names.size()));
    } catch (const std::exception& e) {
      throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rec;
}

}  // namespace lasertele
