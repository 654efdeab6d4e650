#pragma once

// Randomized scene generators shared by the unit and acceptance suites.

#include "lasertele/scene/defaults.hpp"
#include "lasertele/scene/render.hpp"

#include <random>
#include <string>

namespace lasertele::testkit {

inline Rgb random_surface_color(std::mt19937_64& rng) {
  // Chroma R - max(G, B) stays below 60, well under the detector threshold.
  std::uniform_int_distribution<int> c(40, 200);
  int g = c(rng), b = c(rng);
  std::uniform_int_distribution<int> r(30, std::min(255, std::max(g, b) + 60));
  return {std::uint8_t(r(rng)), std::uint8_t(g), std::uint8_t(b)};
}

/// Up to `n` non-overlapping objects resting on the table working area.
inline void add_random_objects(Scene& s, std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ux(s.working_area.lo.x() + 0.05, s.working_area.hi.x() - 0.05);
  std::uniform_real_distribution<double> uy(s.working_area.lo.y() + 0.05, s.working_area.hi.y() - 0.05);
  std::uniform_real_distribution<double> size(0.03, 0.09);
  std::uniform_real_distribution<double> height(0.03, 0.20);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  std::uniform_int_distribution<int> shape(0, 2);
  for (int i = 0, tries = 0; i < n && tries < 50 * n; ++tries) {
    SceneObject o;
    o.name = "obj" + std::to_string(i);
    o.shape = static_cast<Shape>(shape(rng));
    double w = size(rng);
    switch (o.shape) {
      case Shape::Box: o.dimensions = {w, size(rng), height(rng)}; break;
      case Shape::Sphere: o.dimensions = Vec3::Constant(w); break;
      case Shape::Cylinder: o.dimensions = {w, w, height(rng)}; break;
    }
    o.pose = Pose(Vec3(ux(rng), uy(rng), 0.0), Quat(Eigen::AngleAxisd(yaw(rng), Vec3::UnitZ())));
    o.pose.position.z() = o.half_height_z();
    o.color = random_surface_color(rng);
    bool clash = false;
    for (const auto& other : s.objects)
      if ((other.pose.position.head<2>() - o.pose.position.head<2>()).norm() < other.bounding_radius() + o.bounding_radius())
        clash = true;
    if (clash) continue;
    s.objects.push_back(o);
    ++i;
  }
}

/// Laser ray from the user's head toward a random point of the table area.
inline LaserRay random_laser(const Scene& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(s.working_area.lo.x(), s.working_area.hi.x());
  std::uniform_real_distribution<double> uy(s.working_area.lo.y(), s.working_area.hi.y());
  std::uniform_real_distribution<double> uz(0.0, 0.15);
  Vec3 head = default_head_position();
  Vec3 aim(ux(rng), uy(rng), uz(rng));
  return {head, (aim - head).normalized(), true};
}

}  // namespace lasertele::testkit
