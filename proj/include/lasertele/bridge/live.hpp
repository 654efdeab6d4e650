#pragma once

// Live session: the harness Session driven by network input. The tick loop
// and the network side share only the input mailbox (in) and the published
// snapshot text (out).

#include "lasertele/bridge/wire.hpp"
#include "lasertele/harness/runner.hpp"

#include <mutex>

namespace lasertele {

/// Latest-wins slots for pointer and head samples plus a bounded FIFO of
/// session-control messages. Thread-safe.
class InputMailbox {
 public:
  struct Drained {
    std::optional<wire::PointerRay> pointer;
    std::optional<wire::HeadOrientation> head;
    std::vector<wire::SessionControl> controls;
    bool released = false;  // the controlling client went away
  };

  explicit InputMailbox(std::size_t control_capacity = 16) : capacity_(control_capacity) {}

  void post(const wire::PointerRay& p) {
    std::lock_guard lock(m_);
    pending_.pointer = p;
  }
  void post(const wire::HeadOrientation& h) {
    std::lock_guard lock(m_);
    pending_.head = h;
  }
  /// False when the control queue is full; the message is not queued.
  bool post(const wire::SessionControl& c) {
    std::lock_guard lock(m_);
    if (pending_.controls.size() >= capacity_) return false;
    pending_.controls.push_back(c);
    return true;
  }
  /// Drops any pending pointer sample and turns the laser off at the next drain.
  void release() {
    std::lock_guard lock(m_);
    pending_.pointer.reset();
    pending_.released = true;
  }
  Drained drain() {
    std::lock_guard lock(m_);
    Drained out = std::move(pending_);
    pending_ = {};
    return out;
  }

 private:
  std::mutex m_;
  std::size_t capacity_;
  Drained pending_;
};

struct LiveStep {
  wire::StateSnapshot snapshot;
  std::vector<std::string> errors;  // for the controlling client
};

/// Not thread-safe: owned by the tick loop.
class LiveSession {
 public:
  explicit LiveSession(RunSpec spec, std::filesystem::path scenario_dir = {}, bool start_running = true)
      : spec_(std::move(spec)), scenario_dir_(std::move(scenario_dir)), running_(start_running) {
    reset();
  }

  const RunSpec& spec() const { return spec_; }
  const Session& session() const { return *session_; }
  const Recording& recording() const { return rec_; }
  bool running() const { return running_; }
  int epoch() const { return epoch_; }

  /// Applies queued controls, then the latest head and pointer samples, then
  /// advances one tick if running. A head orientation sets the beam; a
  /// pointer ray then overrides origin, beam direction and on-state while
  /// keeping the head roll.
  LiveStep step(const InputMailbox::Drained& in) {
    LiveStep out;
    for (const auto& c : in.controls) {
      try {
        apply(c);
      } catch (const std::exception& e) {
        out.errors.push_back(e.what());
      }
    }
    if (in.released) head_.laser_on = false;
    if (in.head) head_.orientation = in.head->orientation.normalized();
    if (in.pointer) {
      double roll = yaw_pitch_roll(head_.orientation).z();
      head_.position = in.pointer->origin;
      head_.orientation = head_orientation(rpy_toward(in.pointer->direction, roll));
      head_.laser_on = in.pointer->on;
    }
    if (running_) {
      rec_.rows.push_back(session_->tick(head_, rec_.events));
      if (!rec_.events.empty()) last_event_ = rec_.events.back();
      last_row_ = rec_.rows.back();
    }
    out.snapshot = wire::make_snapshot(last_row_, *session_, last_event_, running_, spec_.scenario.name);
    out.snapshot.epoch = epoch_;
    return out;
  }

  /// Recording of the current epoch with its summary filled in.
  Recording finished_recording() const {
    Recording r = rec_;
    finalize(r, spec_.scene);
    return r;
  }

 private:
  void apply(const wire::SessionControl& c) {
    switch (c.action) {
      case wire::ControlAction::Start: running_ = true; break;
      case wire::ControlAction::Pause: running_ = false; break;
      case wire::ControlAction::Reset: reset(); break;
      case wire::ControlAction::Load: {
        if (scenario_dir_.empty()) throw std::runtime_error("load: server has no scenario directory");
        RunSpec next = load_run_spec(scenario_dir_ / (c.scenario + ".json"));
        spec_ = std::move(next);
        reset();
        break;
      }
    }
  }

  void reset() {
    session_ = std::make_unique<Session>(spec_);
    rec_ = Recording{};
    rec_.header = recording_header(spec_);
    for (const auto& o : spec_.scene.objects) rec_.object_names.push_back(o.name);
    head_ = HeadInput{};
    last_event_.reset();
    // Pre-start row: current state, nothing sensed yet.
    last_row_ = TickRow{};
    last_row_.joints = session_->sim().joints;
    last_row_.tcp = fk(spec_.model, session_->sim().joints.q);
    for (const auto& o : spec_.scene.objects) last_row_.objects.push_back(o.pose.position);
    ++epoch_;
  }

  RunSpec spec_;
  std::filesystem::path scenario_dir_;
  bool running_;
  std::unique_ptr<Session> session_;
  Recording rec_;
  HeadInput head_;
  TickRow last_row_;
  std::optional<EventRecord> last_event_;
  int epoch_ = 0;
};

}  // namespace lasertele
