#pragma once

// Scenario runner: drives a Session from the scripted input (or from a
// recording's inputs, for replay), evaluates success checks and produces
// the Recording.

#include "lasertele/harness/metrics.hpp"

#include <functional>

namespace lasertele {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline CheckResult evaluate_check(const nlohmann::json& c, const Recording& rec, const Metrics& m, const Scene& scene) {
  CheckResult r;
  std::string type = c.at("type").get<std::string>();
  r.name = type;
  auto object_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < rec.object_names.size(); ++i)
      if (rec.object_names[i] == name) return int(i);
    throw std::invalid_argument("check " + type + ": unknown object '" + name + "'");
  };

  if (type == "event") {
    std::string ev = c.at("event").get<std::string>();
    r.name += ":" + ev;
    double lo = c.value("t_min", -1e300), hi = c.value("t_max", 1e300);
    int n = 0;
    for (const auto& e : rec.events)
      if (e.type == ev && (!c.contains("detail") || e.detail == c.at("detail").get<std::string>()) && e.t >= lo && e.t <= hi)
        ++n;
    if (c.contains("count")) r.pass = n == c.at("count").get<int>();
    else r.pass = n >= c.value("min_count", 1);
    r.detail = std::to_string(n) + " matching event(s)";
  } else if (type == "mode_always") {
    std::string mode = c.at("mode").get<std::string>();
    r.name += ":" + mode;
    r.pass = !rec.rows.empty();
    for (const auto& row : rec.rows)
      if (to_string(row.mode) != mode) {
        r.pass = false;
        r.detail = "mode " + to_string(row.mode) + " at t=" + fmt(row.t);
        break;
      }
  } else if (type == "object_in_region") {
    std::string obj = c.at("object").get<std::string>();
    r.name += ":" + obj;
    if (rec.rows.empty()) return r;
    const TickRow& last = rec.rows.back();
    int i = object_index(obj);
    Vec3 p = last.objects[i];
    const SceneObject& o = scene.objects[i];
    Aabb region;
    if (c.contains("container")) {
      int k = object_index(c.at("container").get<std::string>());
      SceneObject box = scene.objects[k];
      box.pose.position = last.objects[k];
      Aabb b = box.world_bounds();
      // Footprint of the container, from its floor to one object height above its rim.
      region = {Vec3(b.lo.x(), b.lo.y(), b.lo.z()), Vec3(b.hi.x(), b.hi.y(), b.hi.z() + 2.0 * o.half_height_z())};
    } else {
      region = detail::aabb_from_json(c.at("region"));
    }
    r.pass = region.contains(p) && last.attached != i;
    r.detail = "object at (" + fmt(p.x()) + ", " + fmt(p.y()) + ", " + fmt(p.z()) + ")" +
               (last.attached == i ? ", still held" : "");
  } else if (type == "targets_reached") {
    r.pass = m.complete && !m.targets.empty();
    for (const auto& t : m.targets)
      r.detail += t.name + (t.reached ? " reached " : " missed ") + (t.err_mm ? fmt(*t.err_mm) + " mm; " : "no stop; ");
  } else if (type == "mov_rad") {
    double expected = c.at("expected").get<double>();
    double tol = c.value("rel_tol", 0.01);
    r.pass = std::abs(m.mov_rad - expected) <= tol * expected;
    r.detail = "mov_rad " + fmt(m.mov_rad) + " vs " + fmt(expected);
  } else {
    throw std::invalid_argument("unknown success check type '" + type + "'");
  }
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> evaluate_checks(const Recording& rec, const Scene& scene) {
  Metrics m = compute_metrics(rec);
  std::vector<CheckResult> out;
  for (const auto& c : rec.header.at("scenario").at("success")) out.push_back(detail::evaluate_check(c, rec, m, scene));
  return out;
}

/// No checks: success means every target was reached.
inline bool checks_pass(const std::vector<CheckResult>& checks, const Metrics& m) {
  if (checks.empty()) return m.complete;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

inline void finalize(Recording& rec, const Scene& scene) {
  Metrics m = compute_metrics(rec);
  auto checks = evaluate_checks(rec, scene);
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : checks) cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  rec.summary = {{"ticks", rec.rows.size()},
                 {"end_t", rec.rows.empty() ? 0.0 : rec.rows.back().t},
                 {"success", checks_pass(checks, m)},
                 {"checks", cj},
                 {"metrics", metrics_to_json(m)}};
}

using InputSource = std::function<HeadInput(int tick, double t)>;
using TickObserver = std::function<void(const TickRow&, const Session&)>;

/// Runs `ticks` ticks (or until success when the scenario asks for it).
inline Recording drive(const RunSpec& spec, const InputSource& input, int ticks, const TickObserver& observer = {}) {
  Recording rec;
  rec.header = recording_header(spec);
  for (const auto& o : spec.scene.objects) rec.object_names.push_back(o.name);
  Session session(spec);
  std::size_t checked_events = 0;
  for (int k = 0; k < ticks; ++k) {
    TickRow row = session.tick(input(k, session.now()), rec.events);
    rec.rows.push_back(std::move(row));
    if (observer) observer(rec.rows.back(), session);
    // Success can only change when something happened: an event, or a
    // recorded tcp/object state after one (checked every 15 ticks).
    if (spec.scenario.stop_on_success && (rec.events.size() != checked_events || k % 15 == 0)) {
      checked_events = rec.events.size();
      if (checks_pass(evaluate_checks(rec, spec.scene), compute_metrics(rec))) break;
    }
  }
  finalize(rec, spec.scene);
  return rec;
}

inline int scenario_ticks(const RunSpec& spec) {
  return std::max(1, int(std::floor(spec.scenario.duration * spec.config.tick_rate + 1e-9)));
}

inline Recording run(const RunSpec& spec, const TickObserver& observer = {}) {
  if (spec.scenario.live) throw std::invalid_argument("scenario input is live: use serve");
  const HeadScript& script = spec.scenario.script;
  return drive(spec, [&](int, double t) { return script.sample(t); }, scenario_ticks(spec), observer);
}

/// Re-drives the loop from the recorded head inputs.
inline Recording replay(const Recording& original) {
  RunSpec spec = spec_from_header(original.header);
  spec.scenario.stop_on_success = false;  // reproduce exactly the recorded ticks
  Recording rec = drive(spec, [&](int k, double) { return original.rows.at(k).input; }, int(original.rows.size()));
  rec.header = original.header;
  finalize(rec, spec.scene);
  return rec;
}

/// 0 success, 2 incomplete.
inline int exit_code(const Recording& rec) { return rec.summary.value("success", false) ? 0 : 2; }

}  // namespace lasertele
