#pragma once

#include "lasertele/scene/scene.hpp"

#include <span>
#include <variant>
#include <vector>

namespace lasertele {

/// Head-mounted laser: origin at the head, unit direction.
struct LaserRay {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  bool on = true;
};

/// Bounded flat rectangle in the local xy plane of `pose`.
struct Panel {
  Pose pose;
  double half_x = 0.1;
  double half_y = 0.1;
};

/// Infinite horizontal plane.
struct FloorPlane {
  double z = 0.0;
};

using Primitive = std::variant<Box, Sphere, Cylinder, Capsule, Panel, FloorPlane>;

struct Surface {
  Primitive shape;
  Rgb color;
};

namespace geom {

inline std::optional<double> ray_panel(const Ray& ray, const Panel& p) {
  Vec3 o = p.pose.apply_inverse(ray.origin);
  Vec3 d = p.pose.orientation.conjugate() * ray.direction;
  if (std::abs(d.z()) < 1e-15) return std::nullopt;
  double t = -o.z() / d.z();
  if (t <= kRayEpsilon) return std::nullopt;
  Vec3 h = o + t * d;
  if (std::abs(h.x()) > p.half_x || std::abs(h.y()) > p.half_y) return std::nullopt;
  return t;
}

inline std::optional<double> intersect(const Ray& ray, const Primitive& prim) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) return ray_box(ray, s);
        else if constexpr (std::is_same_v<T, Sphere>) return ray_sphere(ray, s);
        else if constexpr (std::is_same_v<T, Cylinder>) return ray_cylinder(ray, s);
        else if constexpr (std::is_same_v<T, Capsule>) return ray_capsule(ray, s);
        else if constexpr (std::is_same_v<T, Panel>) return ray_panel(ray, s);
        else return ray_plane_z(ray, s.z);
      },
      prim);
}

/// World-space bounds; nullopt for unbounded primitives.
inline std::optional<Aabb> bounds(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> std::optional<Aabb> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) {
          Vec3 h = s.pose.rotation().cwiseAbs() * s.half_extents;
          return Aabb{s.pose.position - h, s.pose.position + h};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return Aabb{s.center.array() - s.radius, s.center.array() + s.radius};
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          Vec3 h = s.pose.rotation().cwiseAbs() * Vec3(s.radius, s.radius, s.half_height);
          return Aabb{s.pose.position - h, s.pose.position + h};
        } else if constexpr (std::is_same_v<T, Capsule>) {
          return capsule_bounds(s);
        } else if constexpr (std::is_same_v<T, Panel>) {
          Vec3 h = s.pose.rotation().cwiseAbs() * Vec3(s.half_x, s.half_y, 0.0);
          return Aabb{s.pose.position - h, s.pose.position + h};
        } else {
          return std::nullopt;
        }
      },
      prim);
}

}  // namespace geom

inline Primitive object_primitive(const SceneObject& o) {
  switch (o.shape) {
    case Shape::Box: return Box{o.pose, 0.5 * o.dimensions};
    case Shape::Sphere: return Sphere{o.pose.position, o.sphere_radius()};
    case Shape::Cylinder: return Cylinder{o.pose, 0.5 * o.dimensions.x(), 0.5 * o.dimensions.z()};
  }
  return Box{o.pose, 0.5 * o.dimensions};
}

/// Geometry that never moves during a run: physical static boxes, keyboard, floor.
inline std::vector<Surface> static_surfaces(const Scene& scene) {
  std::vector<Surface> out;
  for (const auto& b : scene.static_boxes)
    if (b.physical) out.push_back({b.box, b.color});
  if (scene.keyboard)
    out.push_back({Panel{scene.keyboard->pose, 0.5 * scene.keyboard->width, 0.5 * scene.keyboard->height},
                   scene.keyboard->color});
  if (scene.floor_z) out.push_back({FloorPlane{*scene.floor_z}, scene.floor_color});
  return out;
}

inline std::vector<Surface> object_surfaces(const Scene& scene) {
  std::vector<Surface> out;
  out.reserve(scene.objects.size());
  for (const auto& o : scene.objects) out.push_back({object_primitive(o), o.color});
  return out;
}

inline constexpr Rgb kArmColor{120, 125, 135};

inline std::vector<Surface> arm_surfaces(std::span<const Capsule> arm) {
  std::vector<Surface> out;
  for (const auto& c : arm) out.push_back({c, kArmColor});
  return out;
}

struct RayHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Rgb color;
};

inline std::optional<RayHit> nearest_hit(const Ray& ray, std::span<const Surface> surfaces,
                                         std::optional<RayHit> best = std::nullopt) {
  for (const auto& s : surfaces) {
    auto t = geom::intersect(ray, s.shape);
    if (t && (!best || *t < best->t)) best = RayHit{*t, ray.at(*t), s.color};
  }
  return best;
}

/// Nearest laser/surface intersection over the physical scene, the keyboard
/// panel and (optionally) the arm links. nullopt when the ray escapes or the
/// laser is off.
inline std::optional<Vec3> cast_laser(const Scene& scene, const LaserRay& ray, std::span<const Capsule> arm = {}) {
  if (!ray.on) return std::nullopt;
  Ray r{ray.origin, ray.direction.normalized()};
  auto hit = nearest_hit(r, static_surfaces(scene));
  hit = nearest_hit(r, object_surfaces(scene), hit);
  if (!arm.empty()) hit = nearest_hit(r, arm_surfaces(arm), hit);
  if (!hit) return std::nullopt;
  return hit->point;
}

}  // namespace lasertele
