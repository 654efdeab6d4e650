#pragma once

#include "lasertele/kinematics/kinematics.hpp"
#include "lasertele/perception/pipeline.hpp"
#include "lasertele/scene/scene.hpp"

#include <cmath>
#include <vector>

namespace lasertele {

/// Dense world-aligned voxel grid; voxel (i, j, k) spans
/// origin + [i, i+1) * resolution on each axis.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Aabb& extent, double resolution) : resolution_(resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("voxel resolution must be > 0");
    origin_ = (extent.lo / resolution).array().floor().matrix() * resolution;
    Vec3 span = extent.hi - origin_;
    for (int a = 0; a < 3; ++a) dims_[a] = std::max(1, int(std::ceil(span[a] / resolution)));
    cells_.assign(std::size_t(dims_[0]) * dims_[1] * dims_[2], 0);
  }

  double resolution() const { return resolution_; }
  const Vec3& origin() const { return origin_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  std::size_t occupied_count() const { return count_; }
  bool empty() const { return count_ == 0; }

  std::optional<Eigen::Vector3i> cell_of(const Vec3& p) const {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a) {
      double f = std::floor((p[a] - origin_[a]) / resolution_);
      if (f < 0 || f >= dims_[a]) return std::nullopt;
      c[a] = int(f);
    }
    return c;
  }
  bool occupied(int i, int j, int k) const { return cells_[flat(i, j, k)] != 0; }
  bool occupied(const Eigen::Vector3i& c) const { return occupied(c.x(), c.y(), c.z()); }

  /// Marks the voxel holding p; points outside the grid are ignored.
  bool mark(const Vec3& p) {
    auto c = cell_of(p);
    if (!c) return false;
    set(*c, true);
    return true;
  }
  void set(const Eigen::Vector3i& c, bool value) {
    std::uint8_t& cell = cells_[flat(c.x(), c.y(), c.z())];
    if (bool(cell) != value) count_ += value ? 1 : -1;
    cell = value;
  }

  Aabb voxel_box(int i, int j, int k) const {
    Vec3 lo = origin_ + Vec3(i, j, k) * resolution_;
    return {lo, lo + Vec3::Constant(resolution_)};
  }
  Aabb voxel_box(const Eigen::Vector3i& c) const { return voxel_box(c.x(), c.y(), c.z()); }

  /// Inclusive cell index range overlapping `box` (clipped); false if disjoint.
  bool cell_range(const Aabb& box, Eigen::Vector3i& lo, Eigen::Vector3i& hi) const {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, int(std::floor((box.lo[a] - origin_[a]) / resolution_)));
      hi[a] = std::min(dims_[a] - 1, int(std::floor((box.hi[a] - origin_[a]) / resolution_)));
      if (lo[a] > hi[a]) return false;
    }
    return true;
  }

  template <typename F>
  void for_each_occupied(F&& f) const {
    if (count_ == 0) return;
    for (int k = 0; k < dims_[2]; ++k)
      for (int j = 0; j < dims_[1]; ++j)
        for (int i = 0; i < dims_[0]; ++i)
          if (occupied(i, j, k)) f(Eigen::Vector3i(i, j, k));
  }

  std::vector<Eigen::Vector3i> occupied_cells() const {
    std::vector<Eigen::Vector3i> out;
    for_each_occupied([&](const Eigen::Vector3i& c) { out.push_back(c); });
    return out;
  }

  /// Clears every occupied voxel whose box lies closer than `dist` to the segment.
  void clear_near_segment(const Vec3& a, const Vec3& b, double dist) {
    Eigen::Vector3i lo, hi;
    Aabb reach = geom::capsule_bounds({a, b, dist});
    if (!cell_range(reach, lo, hi)) return;
    for (int k = lo.z(); k <= hi.z(); ++k)
      for (int j = lo.y(); j <= hi.y(); ++j)
        for (int i = lo.x(); i <= hi.x(); ++i) {
          if (!occupied(i, j, k)) continue;
          Aabb v = voxel_box(i, j, k);
          if (geom::segment_aabb_distance(a, b, v.lo, v.hi) < dist) set({i, j, k}, false);
        }
  }

 private:
  std::size_t flat(int i, int j, int k) const { return (std::size_t(k) * dims_[1] + j) * dims_[0] + i; }

  double resolution_ = 0.02;
  Vec3 origin_ = Vec3::Zero();
  Eigen::Vector3i dims_ = Eigen::Vector3i::Ones();
  std::vector<std::uint8_t> cells_;
  std::size_t count_ = 0;
};

struct CollisionOptions {
  double voxel_size = 0.02;
  double voxel_margin = 0.01;          // occupied voxels are inflated by this
  double static_point_tolerance = 0.01;  // cloud points this close to a static box belong to it
  Aabb extent{{-1.2, -1.0, -0.1}, {1.2, 1.4, 1.4}};
};

struct CollisionWorld {
  std::vector<StaticBox> static_boxes;  // physical and virtual
  OccupancyGrid grid;
  double voxel_margin = 0.01;
  ArmModel model;
  std::vector<std::pair<int, int>> self_pairs;  // capsule index pairs checked for self-collision
};

inline std::vector<std::pair<int, int>> self_collision_pairs(const ArmModel& model) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < int(model.capsules.size()); ++i)
    for (int j = i + 1; j < int(model.capsules.size()); ++j)
      if (!model.collision_disabled(model.capsules[i].name, model.capsules[j].name)) pairs.emplace_back(i, j);
  return pairs;
}

/// Model carrying a held object as an extra tcp-fixed sphere. The sphere is
/// the object's inscribed radius less `skin`, so an object still resting on
/// its support at grasp time is not already in collision.
inline ArmModel with_attached_object(ArmModel model, const SceneObject& object, const Pose& offset_in_tcp,
                                     double skin = 0.01) {
  double inscribed = 0.5 * (object.shape == Shape::Box ? object.dimensions.minCoeff() : object.dimensions.x());
  if (object.shape == Shape::Cylinder) inscribed = std::min(inscribed, 0.5 * object.dimensions.z());
  Vec3 c = model.tool.apply(offset_in_tcp.position);
  model.capsules.push_back({"attached", kNumJoints, c, c, std::max(0.005, inscribed - skin)});
  for (const auto& cap : model.capsules)
    if (cap.frame >= kNumJoints - 1 && cap.name != "attached") model.disabled_collisions.emplace_back("attached", cap.name);
  return model;
}

inline CollisionWorld empty_world(const Scene& scene, const ArmModel& model, const CollisionOptions& opt = {}) {
  CollisionWorld w;
  w.static_boxes = scene.static_boxes;
  w.grid = OccupancyGrid(opt.extent, opt.voxel_size);
  w.voxel_margin = opt.voxel_margin;
  w.model = model;
  w.self_pairs = self_collision_pairs(model);
  return w;
}

/// Static boxes plus occupancy from a workspace-filtered camera cloud.
/// Points lying on a static box (table surface, keyboard resting on it) are
/// already represented by that box and are not voxelized. Voxels overlapping
/// the arm at q_current (and `extra_clear` volumes) are cleared.
inline CollisionWorld build_world(const Scene& scene, const CameraFrame& filtered, const ArmModel& model,
                                  const JointVector& q_current, const CollisionOptions& opt = {},
                                  std::span<const Capsule> extra_clear = {}) {
  CollisionWorld w = empty_world(scene, model, opt);
  for (const auto& p : filtered.cloud) {
    if (!CameraFrame::valid(p)) continue;
    Vec3 pb = to_base(p.cast<double>(), scene.camera);
    bool on_static = false;
    for (const auto& b : scene.static_boxes) {
      if (b.physical && geom::point_box_distance(pb, b.box) <= opt.static_point_tolerance) {
        on_static = true;
        break;
      }
    }
    if (!on_static) w.grid.mark(pb);
  }
  for (const auto& c : arm_capsules(model, q_current)) w.grid.clear_near_segment(c.a, c.b, c.radius + w.voxel_margin);
  for (const auto& c : extra_clear) w.grid.clear_near_segment(c.a, c.b, c.radius + w.voxel_margin);
  return w;
}

namespace detail {
inline bool capsule_hits_grid(const OccupancyGrid& grid, const Capsule& c, double inflate) {
  if (grid.empty()) return false;
  const double reach = c.radius + inflate;
  Eigen::Vector3i lo, hi;
  if (!grid.cell_range(geom::capsule_bounds(c, inflate), lo, hi)) return false;
  const double half_diag = 0.5 * std::sqrt(3.0) * grid.resolution();
  for (int k = lo.z(); k <= hi.z(); ++k)
    for (int j = lo.y(); j <= hi.y(); ++j)
      for (int i = lo.x(); i <= hi.x(); ++i) {
        if (!grid.occupied(i, j, k)) continue;
        Aabb v = grid.voxel_box(i, j, k);
        double dc = geom::point_segment_distance(v.center(), c.a, c.b);
        if (dc < reach) return true;
        if (dc - half_diag >= reach) continue;
        if (geom::segment_aabb_distance(c.a, c.b, v.lo, v.hi) < reach) return true;
      }
  return false;
}
}  // namespace detail

/// Capsules vs static boxes, inflated voxels and non-adjacent capsules.
/// `clearance` widens every test (used by the planner to certify edges).
inline bool in_collision(const CollisionWorld& w, std::span<const Capsule> caps, double clearance = 0.0) {
  for (const auto& c : caps) {
    for (const auto& b : w.static_boxes)
      if (geom::capsule_intersects_box(c, b.box, clearance)) return true;
    if (detail::capsule_hits_grid(w.grid, c, w.voxel_margin + clearance)) return true;
  }
  for (const auto& [i, j] : w.self_pairs)
    if (geom::capsules_intersect(caps[i], caps[j], clearance)) return true;
  return false;
}

inline bool in_collision(const CollisionWorld& w, const JointVector& q, double clearance = 0.0) {
  auto caps = arm_capsules(w.model, q);
  return in_collision(w, caps, clearance);
}

}  // namespace lasertele
