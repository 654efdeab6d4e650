#pragma once

// Head-orientation velocity interface used as the comparison baseline: the
// tcp moves in one of two vertical/horizontal planes, and a held lateral head
// flexion switches between them.

#include "lasertele/harness/config.hpp"

namespace lasertele {

enum class ImuPlane { ZY, XY };

inline std::string to_string(ImuPlane p) { return p == ImuPlane::ZY ? "z-y" : "x-y"; }

/// Yaw, pitch, roll of `q` (ZYX convention, q = Rz(yaw) Ry(pitch) Rx(roll)).
/// Pitch is in [-pi/2, pi/2].
inline Vec3 yaw_pitch_roll(const Quat& q) {
  Mat3 r = q.normalized().toRotationMatrix();
  double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double yaw = std::atan2(r(1, 0), r(0, 0));
  double roll = std::atan2(r(2, 1), r(2, 2));
  return {yaw, pitch, roll};
}

class ImuBaseline {
 public:
  explicit ImuBaseline(ImuOptions opt = {}, Quat neutral = Quat::Identity()) : opt_(opt), neutral_(neutral) {}

  const ImuOptions& options() const { return opt_; }
  ImuPlane plane() const { return plane_; }
  void set_neutral(const Quat& q) { neutral_ = q; }

  /// Gain times the displacement beyond the deadband, capped at max_speed.
  double axis_speed(double angle) const {
    double beyond = std::max(0.0, std::abs(angle) - opt_.deadband);
    return std::copysign(std::min(opt_.max_speed, opt_.gain * beyond), angle);
  }

  /// One tick. `toggled` is set when the plane switched on this sample.
  Twist update(const Quat& head, double now, bool* toggled = nullptr) {
    Vec3 ypr = yaw_pitch_roll(neutral_.conjugate() * head);
    if (toggled) *toggled = false;
    if (std::abs(ypr.z()) > opt_.toggle_roll) {
      if (!flexing_) flexing_ = true, flex_start_ = now;
      if (!fired_ && now - flex_start_ >= opt_.toggle_hold - 1e-9) {
        plane_ = plane_ == ImuPlane::ZY ? ImuPlane::XY : ImuPlane::ZY;
        fired_ = true;
        if (toggled) *toggled = true;
      }
    } else {
      flexing_ = false;
      fired_ = false;
    }
    Twist t;
    t.linear.y() = axis_speed(ypr.x());
    double vertical = axis_speed(ypr.y());
    if (plane_ == ImuPlane::ZY) t.linear.z() = vertical;
    else t.linear.x() = vertical;
    return t;
  }

 private:
  ImuOptions opt_;
  Quat neutral_;
  ImuPlane plane_ = ImuPlane::ZY;
  bool flexing_ = false;
  bool fired_ = false;
  double flex_start_ = 0.0;
};

}  // namespace lasertele
