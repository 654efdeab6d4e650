#pragma once

#include "lasertele/perception/detector.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace lasertele {

/// Closed box in base_link plus robot-body exclusion volumes.
struct WorkspaceBounds {
  Aabb box{{-0.75, -0.25, -0.01}, {0.75, 0.95, 0.60}};
  std::vector<Capsule> body;
  double body_padding = 0.01;  // absorbs float cloud quantization at link surfaces

  bool keeps(const Vec3& p) const {
    if (!box.contains(p)) return false;
    for (const auto& c : body)
      if (geom::point_segment_distance(p, c.a, c.b) <= c.radius + body_padding) return false;
    return true;
  }
};

/// Current arm links, plus a bounding sphere for an attached object.
inline WorkspaceBounds workspace_bounds(const Aabb& box, const ArmModel& model, const JointVector& q,
                                        const std::optional<SceneObject>& attached = std::nullopt) {
  WorkspaceBounds b;
  b.box = box;
  b.body = arm_capsules(model, q);
  if (attached) b.body.push_back({attached->pose.position, attached->pose.position, attached->bounding_radius()});
  return b;
}

inline Vec3 to_base(const Vec3& point_camera, const CameraModel& camera) { return camera.extrinsics.apply(point_camera); }

/// Marks cloud points outside the bounds or inside the robot body invalid.
/// Organization is preserved; the operation is idempotent.
inline CameraFrame filter_workspace(const CameraFrame& frame, const CameraModel& camera, const WorkspaceBounds& bounds) {
  CameraFrame out = frame;
  for (auto& p : out.cloud) {
    if (!CameraFrame::valid(p)) continue;
    if (!bounds.keeps(to_base(p.cast<double>(), camera))) p = CameraFrame::invalid_point();
  }
  return out;
}

/// cloud[round(v), round(u)] if valid, else the valid 3x3 neighbour closest
/// to the camera. `keep` lets callers mask points lazily.
template <typename Keep>
std::optional<Vec3> pixel_to_point(const CameraFrame& frame, const PixelDetection& det, Keep&& keep) {
  int u = int(std::lround(det.u));
  int v = int(std::lround(det.v));
  if (u < 0 || v < 0 || u >= frame.width || v >= frame.height) return std::nullopt;
  auto usable = [&](int uu, int vv) -> std::optional<Vec3> {
    const Eigen::Vector3f& p = frame.point(uu, vv);
    if (!CameraFrame::valid(p)) return std::nullopt;
    Vec3 pd = p.cast<double>();
    if (!keep(pd)) return std::nullopt;
    return pd;
  };
  if (auto p = usable(u, v)) return p;
  std::optional<Vec3> best;
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      int uu = u + du, vv = v + dv;
      if ((du == 0 && dv == 0) || uu < 0 || vv < 0 || uu >= frame.width || vv >= frame.height) continue;
      auto p = usable(uu, vv);
      if (p && (!best || p->norm() < best->norm())) best = p;
    }
  }
  return best;
}

inline std::optional<Vec3> pixel_to_point(const CameraFrame& frame, const PixelDetection& det) {
  return pixel_to_point(frame, det, [](const Vec3&) { return true; });
}

struct LaserEstimate {
  Vec3 point_base = Vec3::Zero();
  PixelDetection pixel;
  Vec3 raw_point = Vec3::Zero();
  bool valid = false;
  double stamp = 0.0;
};

struct SmootherOptions {
  double alpha = 0.4;  // weight of the newest sample
  int max_misses = 5;
};

/// Exponential moving average with miss hold-over. Misses 1..max_misses-1
/// hold the last estimate; the max_misses-th miss invalidates and resets.
class LaserSmoother {
 public:
  explicit LaserSmoother(SmootherOptions opt = {}) : opt_(opt) {}

  const SmootherOptions& options() const { return opt_; }
  bool initialized() const { return value_.has_value(); }
  void reset() {
    value_.reset();
    misses_ = 0;
  }

  LaserEstimate smooth(const Vec3& sample, bool valid, double stamp = 0.0) {
    LaserEstimate e;
    e.stamp = stamp;
    if (valid) {
      value_ = value_ ? Vec3(opt_.alpha * sample + (1.0 - opt_.alpha) * *value_) : sample;
      misses_ = 0;
      e.raw_point = sample;
    } else if (value_ && ++misses_ >= opt_.max_misses) {
      reset();
    }
    if (value_) {
      e.point_base = *value_;
      e.valid = true;
    }
    return e;
  }

 private:
  SmootherOptions opt_;
  std::optional<Vec3> value_;
  int misses_ = 0;
};

struct PerceptionOptions {
  std::string detector = "chroma";  // "chroma" | "external"
  std::string external_path;        // CSV sidecar for "external"
  int chroma_threshold = 80;
  SmootherOptions smoother;
  Aabb workspace{{-0.75, -0.25, -0.01}, {0.75, 0.95, 0.60}};
};

inline std::unique_ptr<SpotDetector> make_detector(const PerceptionOptions& opt) {
  if (opt.detector == "chroma") return std::make_unique<ChromaDetector>(opt.chroma_threshold);
  if (opt.detector == "external") return std::make_unique<ExternalDetector>(ExternalDetector::from_csv(opt.external_path));
  throw std::invalid_argument("perception.detector must be \"chroma\" or \"external\"");
}

/// detect -> match (workspace-filtered) -> to_base -> smooth. One estimate per frame.
class PerceptionPipeline {
 public:
  PerceptionPipeline(CameraModel camera, std::unique_ptr<SpotDetector> detector, SmootherOptions smoother = {})
      : camera_(std::move(camera)), detector_(std::move(detector)), smoother_(smoother) {}

  PerceptionPipeline(CameraModel camera, const PerceptionOptions& opt)
      : PerceptionPipeline(std::move(camera), make_detector(opt), opt.smoother) {}

  const CameraModel& camera() const { return camera_; }
  LaserSmoother& smoother() { return smoother_; }

  /// Raw (unsmoothed) base-frame point for a frame; the cloud is filtered only
  /// where the match looks, which equals matching on filter_workspace's output.
  std::optional<Vec3> locate(const CameraFrame& frame, const WorkspaceBounds& bounds,
                             std::optional<PixelDetection>* det_out = nullptr) {
    auto det = detector_->detect(frame);
    if (det_out) *det_out = det;
    if (!det) return std::nullopt;
    auto p = pixel_to_point(frame, *det, [&](const Vec3& pc) { return bounds.keeps(to_base(pc, camera_)); });
    if (!p) return std::nullopt;
    return to_base(*p, camera_);
  }

  LaserEstimate process(const CameraFrame& frame, const WorkspaceBounds& bounds) {
    std::optional<PixelDetection> det;
    auto p = locate(frame, bounds, &det);
    LaserEstimate e = smoother_.smooth(p.value_or(Vec3::Zero()), p.has_value(), frame.stamp);
    if (det) e.pixel = *det;
    return e;
  }

 private:
  CameraModel camera_;
  std::unique_ptr<SpotDetector> detector_;
  LaserSmoother smoother_;
};

}  // namespace lasertele
