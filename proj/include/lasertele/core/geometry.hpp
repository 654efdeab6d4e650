#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace lasertele {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

/// Rigid transform stored as translation + unit quaternion.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Pose() = default;
  Pose(Vec3 p, Quat q) : position(std::move(p)), orientation(q.normalized()) {}

  static Pose from_isometry(const Eigen::Isometry3d& t) {
    return Pose(t.translation(), Quat(t.rotation()));
  }
  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = orientation.toRotationMatrix();
    t.translation() = position;
    return t;
  }
  Mat3 rotation() const { return orientation.toRotationMatrix(); }

  Vec3 apply(const Vec3& p) const { return position + orientation * p; }
  Vec3 apply_inverse(const Vec3& p) const { return orientation.conjugate() * (p - position); }

  Pose operator*(const Pose& o) const {
    return Pose(position + orientation * o.position, orientation * o.orientation);
  }
  Pose inverse() const {
    Quat inv = orientation.conjugate();
    return Pose(-(inv * position), inv);
  }
};

inline Quat quat_from_rpy(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

/// Geodesic angle between two orientations, in [0, pi].
inline double angle_between(const Quat& a, const Quat& b) {
  double d = std::abs(a.normalized().dot(b.normalized()));
  d = std::min(1.0, d);
  return 2.0 * std::acos(d);
}

/// Rotation vector (axis * angle) of R, angle in [0, pi].
inline Vec3 rotation_vector(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  double angle = aa.angle();
  if (angle > kPi) angle -= 2.0 * kPi;
  return aa.axis() * angle;
}

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  Vec3 at(double t) const { return origin + t * direction; }
};

/// Oriented box; half extents along the local axes of `pose`.
struct Box {
  Pose pose;
  Vec3 half_extents = Vec3::Constant(0.5);
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.5;
};

/// Finite cylinder, axis along local z, centered at the pose origin.
struct Cylinder {
  Pose pose;
  double radius = 0.5;
  double half_height = 0.5;
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

/// Axis-aligned box given by its corners (closed set).
struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  double volume() const { return (hi - lo).prod(); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 half_extents() const { return 0.5 * (hi - lo); }
};

namespace geom {

inline constexpr double kRayEpsilon = 1e-9;

/// Smallest t > eps where the ray crosses the slab box [lo, hi] (local coords).
inline std::optional<double> ray_aabb(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
      continue;
    }
    double inv = 1.0 / d[i];
    double t1 = (lo[i] - o[i]) * inv;
    double t2 = (hi[i] - o[i]) * inv;
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmin > kRayEpsilon) return tmin;
  if (tmax > kRayEpsilon) return tmax;
  return std::nullopt;
}

inline std::optional<double> ray_box(const Ray& ray, const Box& box) {
  Vec3 o = ray.origin - box.pose.position;
  Quat inv = box.pose.orientation.conjugate();
  return ray_aabb(inv * o, inv * ray.direction, -box.half_extents, box.half_extents);
}

inline std::optional<double> ray_sphere(const Ray& ray, const Vec3& center, double radius) {
  Vec3 oc = ray.origin - center;
  double b = oc.dot(ray.direction);
  double c = oc.squaredNorm() - radius * radius;
  double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  double s = std::sqrt(disc);
  double t0 = -b - s;
  double t1 = -b + s;
  if (t0 > kRayEpsilon) return t0;
  if (t1 > kRayEpsilon) return t1;
  return std::nullopt;
}

inline std::optional<double> ray_sphere(const Ray& ray, const Sphere& s) {
  return ray_sphere(ray, s.center, s.radius);
}

namespace detail {
inline void keep_min(std::optional<double>& best, std::optional<double> t) {
  if (t && (!best || *t < *best)) best = t;
}
}  // namespace detail

/// Ray against the lateral surface of a z-axis cylinder in local coordinates,
/// restricted to |z| <= half_height.
inline std::optional<double> ray_cylinder_side(const Vec3& o, const Vec3& d, double r, double hh) {
  double a = d.x() * d.x() + d.y() * d.y();
  if (a < 1e-18) return std::nullopt;
  double b = o.x() * d.x() + o.y() * d.y();
  double c = o.x() * o.x() + o.y() * o.y() - r * r;
  double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  double s = std::sqrt(disc);
  std::optional<double> best;
  for (double t : {(-b - s) / a, (-b + s) / a}) {
    if (t <= kRayEpsilon) continue;
    double z = o.z() + t * d.z();
    if (std::abs(z) <= hh) detail::keep_min(best, t);
  }
  return best;
}

inline std::optional<double> ray_cylinder(const Ray& ray, const Cylinder& cyl) {
  Quat inv = cyl.pose.orientation.conjugate();
  Vec3 o = inv * (ray.origin - cyl.pose.position);
  Vec3 d = inv * ray.direction;
  std::optional<double> best = ray_cylinder_side(o, d, cyl.radius, cyl.half_height);
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-cyl.half_height, cyl.half_height}) {
      double t = (zc - o.z()) / d.z();
      if (t <= kRayEpsilon) continue;
      Vec3 p = o + t * d;
      if (p.x() * p.x() + p.y() * p.y() <= cyl.radius * cyl.radius) detail::keep_min(best, t);
    }
  }
  return best;
}

inline std::optional<double> ray_capsule(const Ray& ray, const Capsule& cap) {
  std::optional<double> best;
  detail::keep_min(best, ray_sphere(ray, cap.a, cap.radius));
  detail::keep_min(best, ray_sphere(ray, cap.b, cap.radius));
  Vec3 axis = cap.b - cap.a;
  double len = axis.norm();
  if (len < 1e-12) return best;
  Vec3 z = axis / len;
  Quat q = Quat::FromTwoVectors(Vec3::UnitZ(), z);
  Vec3 mid = 0.5 * (cap.a + cap.b);
  Vec3 o = q.conjugate() * (ray.origin - mid);
  Vec3 d = q.conjugate() * ray.direction;
  detail::keep_min(best, ray_cylinder_side(o, d, cap.radius, 0.5 * len));
  return best;
}

/// Horizontal plane z = height, hit from either side.
inline std::optional<double> ray_plane_z(const Ray& ray, double height) {
  if (std::abs(ray.direction.z()) < 1e-15) return std::nullopt;
  double t = (height - ray.origin.z()) / ray.direction.z();
  if (t <= kRayEpsilon) return std::nullopt;
  return t;
}

// --- distances -----------------------------------------------------------

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double l2 = ab.squaredNorm();
  double t = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

/// Closest distance between segments [p1,q1] and [p2,q2].
inline double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  Vec3 d1 = q1 - p1;
  Vec3 d2 = q2 - p2;
  Vec3 r = p1 - p2;
  double a = d1.squaredNorm();
  double e = d2.squaredNorm();
  double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  constexpr double eps = 1e-18;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      double b = d1.dot(d2);
      double denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

inline double point_aabb_distance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  Vec3 c = p.cwiseMax(lo).cwiseMin(hi);
  return (p - c).norm();
}

/// Exact distance between a segment and an axis-aligned box (0 when they touch).
inline double segment_aabb_distance(const Vec3& a, const Vec3& b, const Vec3& lo, const Vec3& hi) {
  Vec3 d = b - a;
  // Clip the segment against the slabs; any surviving interval means overlap.
  double t0 = 0.0;
  double t1 = 1.0;
  bool overlap = true;
  for (int i = 0; i < 3 && overlap; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (a[i] < lo[i] || a[i] > hi[i]) overlap = false;
      continue;
    }
    double inv = 1.0 / d[i];
    double ta = (lo[i] - a[i]) * inv;
    double tb = (hi[i] - a[i]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) overlap = false;
  }
  if (overlap) return 0.0;

  // Disjoint: the closest pair involves an endpoint or a box edge.
  double best = std::min(point_aabb_distance(a, lo, hi), point_aabb_distance(b, lo, hi));
  for (int axis = 0; axis < 3; ++axis) {
    int u = (axis + 1) % 3;
    int v = (axis + 2) % 3;
    for (int cu = 0; cu < 2; ++cu) {
      for (int cv = 0; cv < 2; ++cv) {
        Vec3 e0;
        e0[axis] = lo[axis];
        e0[u] = cu ? hi[u] : lo[u];
        e0[v] = cv ? hi[v] : lo[v];
        Vec3 e1 = e0;
        e1[axis] = hi[axis];
        best = std::min(best, segment_segment_distance(a, b, e0, e1));
      }
    }
  }
  return best;
}

inline double segment_box_distance(const Vec3& a, const Vec3& b, const Box& box) {
  Quat inv = box.pose.orientation.conjugate();
  Vec3 la = inv * (a - box.pose.position);
  Vec3 lb = inv * (b - box.pose.position);
  return segment_aabb_distance(la, lb, -box.half_extents, box.half_extents);
}

inline double point_box_distance(const Vec3& p, const Box& box) {
  return point_aabb_distance(box.pose.apply_inverse(p), -box.half_extents, box.half_extents);
}

inline bool capsule_intersects_box(const Capsule& c, const Box& box, double margin = 0.0) {
  return segment_box_distance(c.a, c.b, box) < c.radius + margin;
}

inline bool capsules_intersect(const Capsule& c1, const Capsule& c2, double margin = 0.0) {
  return segment_segment_distance(c1.a, c1.b, c2.a, c2.b) < c1.radius + c2.radius + margin;
}

inline bool point_in_capsule(const Vec3& p, const Capsule& c) {
  return point_segment_distance(p, c.a, c.b) <= c.radius;
}

inline Aabb capsule_bounds(const Capsule& c, double pad = 0.0) {
  Vec3 r = Vec3::Constant(c.radius + pad);
  return {c.a.cwiseMin(c.b) - r, c.a.cwiseMax(c.b) + r};
}

}  // namespace geom
}  // namespace lasertele
