#pragma once

#include "lasertele/kinematics/kinematics.hpp"
#include "lasertele/scene/raycast.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace lasertele {

/// Aligned RGB image and organized point cloud (camera frame). Invalid cloud
/// points are NaN.
struct CameraFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;       // row-major, 3 bytes per pixel
  std::vector<Eigen::Vector3f> cloud;  // row-major, one point per pixel
  double stamp = 0.0;

  CameraFrame() = default;
  CameraFrame(int w, int h)
      : width(w), height(h), rgb(std::size_t(w) * h * 3, 0),
        cloud(std::size_t(w) * h, Eigen::Vector3f::Constant(std::numeric_limits<float>::quiet_NaN())) {}

  std::size_t index(int u, int v) const { return std::size_t(v) * width + u; }
  static bool valid(const Eigen::Vector3f& p) { return !std::isnan(p.x()); }
  bool valid(int u, int v) const { return valid(cloud[index(u, v)]); }
  const Eigen::Vector3f& point(int u, int v) const { return cloud[index(u, v)]; }
  Rgb pixel(int u, int v) const {
    const std::uint8_t* p = &rgb[3 * index(u, v)];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int u, int v, Rgb c) {
    std::uint8_t* p = &rgb[3 * index(u, v)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  static Eigen::Vector3f invalid_point() { return Eigen::Vector3f::Constant(std::numeric_limits<float>::quiet_NaN()); }
};

struct RenderOptions {
  double laser_sigma_px = 1.5;
  double laser_peak = 255.0;
};

/// Ray-casting renderer with z-buffering. Static geometry is rendered once
/// and cached; objects and arm links are drawn per frame inside their
/// projected screen rectangles.
class Renderer {
 public:
  explicit Renderer(const Scene& scene, RenderOptions opt = {}) : camera_(scene.camera), options_(opt) {
    const Intrinsics& in = camera_.intrinsics;
    rays_.resize(std::size_t(in.width) * in.height);
    for (int v = 0; v < in.height; ++v)
      for (int u = 0; u < in.width; ++u) rays_[std::size_t(v) * in.width + u] = camera_.pixel_ray(u, v);
    background_ = CameraFrame(in.width, in.height);
    background_depth_.assign(rays_.size(), std::numeric_limits<double>::infinity());
    draw(static_surfaces(scene), background_, background_depth_);
  }

  const CameraModel& camera() const { return camera_; }
  const RenderOptions& options() const { return options_; }

  CameraFrame render(const Scene& scene, std::span<const Capsule> arm, const std::optional<Vec3>& laser_hit,
                     double stamp) const {
    CameraFrame frame = background_;
    std::vector<double> depth = background_depth_;
    std::vector<Surface> dynamic = object_surfaces(scene);
    for (auto& s : arm_surfaces(arm)) dynamic.push_back(std::move(s));
    draw(dynamic, frame, depth);
    if (laser_hit && laser_visible(scene, arm, *laser_hit)) paint_laser(frame, *laser_hit);
    frame.stamp = stamp;
    return frame;
  }

  /// True when nothing lies between the camera and `p` (1 mm tolerance).
  bool laser_visible(const Scene& scene, std::span<const Capsule> arm, const Vec3& p) const {
    Vec3 pc = camera_.extrinsics.apply_inverse(p);
    if (pc.z() <= 1e-6) return false;
    Eigen::Vector2d uv = camera_.project(pc);
    const Intrinsics& in = camera_.intrinsics;
    if (uv.x() < -0.5 || uv.y() < -0.5 || uv.x() > in.width - 0.5 || uv.y() > in.height - 0.5) return false;
    Vec3 eye = camera_.extrinsics.position;
    double dist = (p - eye).norm();
    Ray r{eye, (p - eye) / dist};
    auto hit = nearest_hit(r, static_surfaces(scene));
    hit = nearest_hit(r, object_surfaces(scene), hit);
    hit = nearest_hit(r, arm_surfaces(arm), hit);
    return !hit || hit->t >= dist - 1e-3;
  }

 private:
  void draw(std::span<const Surface> surfaces, CameraFrame& frame, std::vector<double>& depth) const {
    const Intrinsics& in = camera_.intrinsics;
    const Vec3 eye = camera_.extrinsics.position;
    const Quat rot = camera_.extrinsics.orientation;
    for (const auto& s : surfaces) {
      int u0 = 0, v0 = 0, u1 = in.width - 1, v1 = in.height - 1;
      if (auto box = geom::bounds(s.shape)) {
        if (!screen_rect(*box, u0, v0, u1, v1)) continue;
      }
      for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
          std::size_t i = std::size_t(v) * in.width + u;
          const Vec3& dc = rays_[i];
          Ray r{eye, rot * dc};
          auto t = geom::intersect(r, s.shape);
          if (!t || *t >= depth[i]) continue;
          depth[i] = *t;
          frame.cloud[i] = (*t * dc).cast<float>();
          frame.set_pixel(u, v, s.color);
        }
      }
    }
  }

  /// Pixel rectangle covering the projection of `box`; false if off-screen.
  bool screen_rect(const Aabb& box, int& u0, int& v0, int& u1, int& v1) const {
    const Intrinsics& in = camera_.intrinsics;
    double umin = 1e18, vmin = 1e18, umax = -1e18, vmax = -1e18;
    for (int c = 0; c < 8; ++c) {
      Vec3 corner((c & 1) ? box.hi.x() : box.lo.x(), (c & 2) ? box.hi.y() : box.lo.y(), (c & 4) ? box.hi.z() : box.lo.z());
      Vec3 pc = camera_.extrinsics.apply_inverse(corner);
      if (pc.z() <= 1e-3) {  // straddles the image plane: scan everything
        u0 = 0, v0 = 0, u1 = in.width - 1, v1 = in.height - 1;
        return true;
      }
      Eigen::Vector2d uv = camera_.project(pc);
      umin = std::min(umin, uv.x());
      umax = std::max(umax, uv.x());
      vmin = std::min(vmin, uv.y());
      vmax = std::max(vmax, uv.y());
    }
    u0 = std::max(0, int(std::floor(umin)) - 1);
    v0 = std::max(0, int(std::floor(vmin)) - 1);
    u1 = std::min(in.width - 1, int(std::ceil(umax)) + 1);
    v1 = std::min(in.height - 1, int(std::ceil(vmax)) + 1);
    return u0 <= u1 && v0 <= v1;
  }

  void paint_laser(CameraFrame& frame, const Vec3& p) const {
    Eigen::Vector2d uv = camera_.project(camera_.extrinsics.apply_inverse(p));
    double sigma = options_.laser_sigma_px;
    int reach = int(std::ceil(4.0 * sigma));
    int uc = int(std::lround(uv.x()));
    int vc = int(std::lround(uv.y()));
    for (int v = std::max(0, vc - reach); v <= std::min(frame.height - 1, vc + reach); ++v) {
      for (int u = std::max(0, uc - reach); u <= std::min(frame.width - 1, uc + reach); ++u) {
        double du = u - uv.x();
        double dv = v - uv.y();
        double g = (options_.laser_peak / 255.0) * std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
        Rgb base = frame.pixel(u, v);
        auto mix = [g](double b, double target) {
          return static_cast<std::uint8_t>(std::lround(std::clamp((1.0 - g) * b + g * target, 0.0, 255.0)));
        };
        frame.set_pixel(u, v, {mix(base.r, 255.0), mix(base.g, 0.0), mix(base.b, 0.0)});
      }
    }
  }

  CameraModel camera_;
  RenderOptions options_;
  std::vector<Vec3> rays_;
  CameraFrame background_;
  std::vector<double> background_depth_;
};

/// One-shot render of the scene with the arm at `joints`.
inline CameraFrame render_frame(const Scene& scene, const ArmModel& model, const JointState& joints,
                                const std::optional<Vec3>& laser_hit, const RenderOptions& opt = {}) {
  Renderer renderer(scene, opt);
  auto arm = arm_capsules(model, joints.q);
  return renderer.render(scene, arm, laser_hit, joints.stamp);
}

}  // namespace lasertele
