#pragma once

// Task metrics computed from a recording alone (so replays reproduce them):
// head movement integral, per-target error at tcp stops, task time.

#include "lasertele/harness/recording.hpp"

#include <set>

namespace lasertele {

struct TargetResult {
  std::string name;
  std::optional<double> err_mm;  // nullopt: the tcp never stopped
  bool reached = false;
  std::optional<double> reached_at;  // first stop inside the radius
};

struct Metrics {
  double time_s = 0.0;
  double mov_rad = 0.0;
  std::vector<TargetResult> targets;
  bool complete = true;  // every target reached
};

/// Sum of geodesic angles between consecutive orientations.
inline double head_movement(const std::vector<Quat>& stream) {
  double total = 0.0;
  for (std::size_t i = 1; i < stream.size(); ++i) total += angle_between(stream[i - 1], stream[i]);
  return total;
}

/// Ticks at which the tcp comes to rest after moving, plus the last tick.
inline std::vector<std::size_t> tcp_stop_ticks(const std::vector<TickRow>& rows, double still = 1e-6) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    bool moved_in = (rows[k].tcp.position - rows[k - 1].tcp.position).norm() > still;
    bool moves_out = (rows[k + 1].tcp.position - rows[k].tcp.position).norm() > still;
    if (moved_in && !moves_out) out.push_back(k);
  }
  if (!rows.empty()) out.push_back(rows.size() - 1);
  return out;
}

/// Events that mark progress of the task (used for time_s without targets).
inline bool is_task_event(const std::string& type) {
  static const std::set<std::string> task = {"goal_selected",   "goal_replaced",  "button_triggered", "button_released",
                                             "trajectory_done", "gripper_done",   "goal_rejected",    "plane_toggled",
                                             "motion_stopped",  "object_released"};
  return task.count(type) > 0;
}

inline Metrics compute_metrics(const Recording& rec) {
  Metrics m;
  std::vector<Quat> head;
  head.reserve(rec.rows.size());
  for (const auto& r : rec.rows) head.push_back(r.input.orientation);
  m.mov_rad = head_movement(head);

  auto stops = tcp_stop_ticks(rec.rows);
  for (const auto& t : rec.header.at("scenario").at("targets")) {
    TargetResult tr;
    tr.name = t.at("name").get<std::string>();
    Vec3 p = detail::vec3_from_json(t.at("point"));
    double radius = t.at("radius").get<double>();
    for (std::size_t k : stops) {
      double d = (rec.rows[k].tcp.position - p).norm();
      if (!tr.err_mm || 1000.0 * d < *tr.err_mm) tr.err_mm = 1000.0 * d;
      if (d <= radius && !tr.reached_at) tr.reached_at = rec.rows[k].t;
    }
    tr.reached = tr.reached_at.has_value();
    m.complete = m.complete && tr.reached;
    m.targets.push_back(tr);
  }

  if (!m.targets.empty()) {
    if (m.complete)
      for (const auto& t : m.targets) m.time_s = std::max(m.time_s, *t.reached_at);
    else if (!rec.rows.empty())
      m.time_s = rec.rows.back().t;
  } else {
    for (const auto& e : rec.events)
      if (is_task_event(e.type)) m.time_s = std::max(m.time_s, e.t);
  }
  return m;
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : m.targets) {
    nlohmann::json j{{"name", t.name}, {"reached", t.reached}};
    j["err_mm"] = t.err_mm ? nlohmann::json(*t.err_mm) : nlohmann::json();
    j["reached_at_s"] = t.reached_at ? nlohmann::json(*t.reached_at) : nlohmann::json();
    targets.push_back(j);
  }
  return {{"time_s", m.time_s}, {"mov_rad", m.mov_rad}, {"targets", targets}, {"complete", m.complete}};
}

}  // namespace lasertele
