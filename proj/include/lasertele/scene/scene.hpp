#pragma once

#include "lasertele/core/geometry.hpp"
#include "lasertele/kinematics/arm_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lasertele {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct StaticBox {
  std::string label;
  Box box;
  // Virtual boxes (e.g. the user bounding box) exist only for planning:
  // lasers pass through them and the camera does not see them.
  bool physical = true;
  Rgb color{150, 140, 130};
};

enum class Shape { Box, Sphere, Cylinder };

struct SceneObject {
  std::string name;
  Shape shape = Shape::Box;
  Pose pose;
  // Box: full size (x, y, z). Sphere: (diameter, -, -). Cylinder: (diameter, -, height).
  Vec3 dimensions = Vec3::Constant(0.05);
  bool graspable = true;
  Rgb color{170, 130, 100};

  double sphere_radius() const { return 0.5 * dimensions.x(); }

  /// Width the gripper has to close around.
  double grip_width() const {
    switch (shape) {
      case Shape::Box: return std::min(dimensions.x(), dimensions.y());
      case Shape::Sphere:
      case Shape::Cylinder: return dimensions.x();
    }
    return dimensions.x();
  }

  /// Half extent along base z (for resting on a support).
  double half_height_z() const {
    Mat3 r = pose.rotation();
    switch (shape) {
      case Shape::Box: {
        Vec3 h = 0.5 * dimensions;
        return std::abs(r(2, 0)) * h.x() + std::abs(r(2, 1)) * h.y() + std::abs(r(2, 2)) * h.z();
      }
      case Shape::Sphere: return sphere_radius();
      case Shape::Cylinder: {
        double rad = 0.5 * dimensions.x();
        double hh = 0.5 * dimensions.z();
        double c = std::abs(r(2, 2));
        return c * hh + std::sqrt(std::max(0.0, 1.0 - c * c)) * rad;
      }
    }
    return 0.0;
  }

  double bounding_radius() const {
    switch (shape) {
      case Shape::Box: return 0.5 * dimensions.norm();
      case Shape::Sphere: return sphere_radius();
      case Shape::Cylinder: return std::hypot(0.5 * dimensions.x(), 0.5 * dimensions.z());
    }
    return 0.0;
  }

  /// Footprint / volume test used for "inside container" checks.
  Aabb world_bounds() const {
    Vec3 h;
    Mat3 r = pose.rotation().cwiseAbs();
    switch (shape) {
      case Shape::Box: h = r * (0.5 * dimensions); break;
      case Shape::Sphere: h = Vec3::Constant(sphere_radius()); break;
      case Shape::Cylinder: h = r * Vec3(0.5 * dimensions.x(), 0.5 * dimensions.x(), 0.5 * dimensions.z()); break;
    }
    return {pose.position - h, pose.position + h};
  }
};

struct Intrinsics {
  double fx = 600.0, fy = 600.0;
  double cx = 320.0, cy = 240.0;
  int width = 640, height = 480;
};

/// Pinhole camera. `extrinsics` is the pose of the optical frame
/// (z forward, x right, y down) in base_link.
struct CameraModel {
  Intrinsics intrinsics;
  Pose extrinsics;
  double rate = 30.0;

  /// Pixel coordinates of a camera-frame point (pixel centers at integers).
  Eigen::Vector2d project(const Vec3& p_cam) const {
    return {intrinsics.fx * p_cam.x() / p_cam.z() + intrinsics.cx, intrinsics.fy * p_cam.y() / p_cam.z() + intrinsics.cy};
  }
  /// Unit ray direction through pixel (u, v) in the camera frame.
  Vec3 pixel_ray(double u, double v) const {
    return Vec3((u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy, 1.0).normalized();
  }

  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ()) {
    Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(up);
    if (x.norm() < 1e-9) x = z.cross(Vec3::UnitY());
    x.normalize();
    Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return Pose(eye, Quat(r));
  }
};

/// Flat rectangular panel carrying the paper keyboard, in the xy plane of
/// its keyboard_base frame.
struct KeyboardPanel {
  Pose pose;
  double width = 0.25;   // along keyboard x
  double height = 0.55;  // along keyboard y
  std::string layout_ref;
  Rgb color{235, 235, 225};

  std::array<Vec3, 4> corners() const {
    double hx = 0.5 * width, hy = 0.5 * height;
    return {pose.apply({-hx, -hy, 0}), pose.apply({hx, -hy, 0}), pose.apply({hx, hy, 0}), pose.apply({-hx, hy, 0})};
  }
};

struct Scene {
  std::vector<StaticBox> static_boxes;
  std::vector<SceneObject> objects;
  std::optional<KeyboardPanel> keyboard;
  CameraModel camera;
  Pose arm_base_pose;
  std::optional<double> floor_z;
  Aabb working_area{{-0.35, 0.25, 0.0}, {0.45, 0.85, 0.5}};
  Rgb floor_color{90, 90, 95};

  const SceneObject* find_object(const std::string& name) const {
    for (const auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }
  SceneObject* find_object(const std::string& name) {
    for (auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }

  void validate() const {
    auto unit = [](const Quat& q, const std::string& what) {
      if (std::abs(q.norm() - 1.0) > 1e-9) throw std::invalid_argument(what + ": quaternion not unit-norm");
    };
    for (const auto& b : static_boxes) {
      if ((b.box.half_extents.array() <= 0.0).any()) throw std::invalid_argument("box " + b.label + ": size must be > 0");
      unit(b.box.pose.orientation, "box " + b.label);
    }
    for (const auto& o : objects) {
      bool ok = o.dimensions.x() > 0.0;
      if (o.shape == Shape::Box) ok = ok && o.dimensions.y() > 0.0 && o.dimensions.z() > 0.0;
      if (o.shape == Shape::Cylinder) ok = ok && o.dimensions.z() > 0.0;
      if (!ok) throw std::invalid_argument("object " + o.name + ": dimensions must be > 0");
      unit(o.pose.orientation, "object " + o.name);
    }
    const Intrinsics& in = camera.intrinsics;
    if (!(in.fx > 0 && in.fy > 0)) throw std::invalid_argument("camera: fx, fy must be > 0");
    if (!(in.cx > 0 && in.cx < in.width && in.cy > 0 && in.cy < in.height))
      throw std::invalid_argument("camera: principal point outside the image");
    if (!(camera.rate > 0)) throw std::invalid_argument("camera: rate must be > 0");
    unit(camera.extrinsics.orientation, "camera");
    if (!arm_base_pose.position.isZero(1e-12) || angle_between(arm_base_pose.orientation, Quat::Identity()) > 1e-12)
      throw std::invalid_argument("arm_base_pose must be identity (base_link is the world frame)");
    if (working_area.volume() <= 0.0) throw std::invalid_argument("working_area must have positive volume");
    if (keyboard) {
      if (!(keyboard->width > 0 && keyboard->height > 0)) throw std::invalid_argument("keyboard: size must be > 0");
      unit(keyboard->pose.orientation, "keyboard");
      Aabb kb{Vec3::Constant(1e9), Vec3::Constant(-1e9)};
      for (const auto& c : keyboard->corners()) {
        kb.lo = kb.lo.cwiseMin(c);
        kb.hi = kb.hi.cwiseMax(c);
      }
      bool disjoint = (kb.hi.head<2>().array() < working_area.lo.head<2>().array()).any() ||
                      (kb.lo.head<2>().array() > working_area.hi.head<2>().array()).any();
      if (!disjoint) throw std::invalid_argument("keyboard panel intersects the table working area");
    }
  }
};

// --- scene file ----------------------------------------------------------

inline constexpr int kSceneSchemaVersion = 1;

namespace detail {
inline Rgb rgb_from_json(const nlohmann::json& j, Rgb fallback) {
  if (j.is_null()) return fallback;
  return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}
inline nlohmann::json rgb_to_json(const Rgb& c) { return {c.r, c.g, c.b}; }
inline Aabb aabb_from_json(const nlohmann::json& j) { return {vec3_from_json(j.at("min")), vec3_from_json(j.at("max"))}; }
inline nlohmann::json aabb_to_json(const Aabb& a) { return {{"min", vec3_to_json(a.lo)}, {"max", vec3_to_json(a.hi)}}; }

inline Shape shape_from_string(const std::string& s) {
  if (s == "box") return Shape::Box;
  if (s == "sphere") return Shape::Sphere;
  if (s == "cylinder") return Shape::Cylinder;
  throw std::invalid_argument("unknown object shape '" + s + "'");
}
inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::Box: return "box";
    case Shape::Sphere: return "sphere";
    case Shape::Cylinder: return "cylinder";
  }
  return "box";
}
}  // namespace detail

inline Scene scene_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (j.value("schema", 0) != kSceneSchemaVersion) throw std::invalid_argument("scene: unsupported schema version");
  Scene s;
  for (const auto& b : j.value("static_boxes", nlohmann::json::array())) {
    StaticBox sb;
    sb.label = b.at("label").get<std::string>();
    sb.box.pose = pose_from_json(b.at("pose"));
    sb.box.half_extents = 0.5 * vec3_from_json(b.at("size"));
    sb.physical = b.value("physical", true);
    sb.color = rgb_from_json(b.value("color", nlohmann::json()), sb.color);
    s.static_boxes.push_back(std::move(sb));
  }
  for (const auto& o : j.value("objects", nlohmann::json::array())) {
    SceneObject obj;
    obj.name = o.at("name").get<std::string>();
    obj.shape = shape_from_string(o.at("shape").get<std::string>());
    obj.pose = pose_from_json(o.at("pose"));
    const auto& d = o.at("dimensions");
    obj.dimensions = Vec3(d.at(0).get<double>(), d.size() > 1 ? d.at(1).get<double>() : d.at(0).get<double>(),
                          d.size() > 2 ? d.at(2).get<double>() : d.at(0).get<double>());
    obj.graspable = o.value("graspable", true);
    obj.color = rgb_from_json(o.value("color", nlohmann::json()), obj.color);
    s.objects.push_back(std::move(obj));
  }
  if (j.contains("keyboard")) {
    const auto& k = j.at("keyboard");
    KeyboardPanel kp;
    kp.pose = pose_from_json(k.at("pose"));
    kp.width = k.at("size").at(0).get<double>();
    kp.height = k.at("size").at(1).get<double>();
    kp.layout_ref = k.value("layout_ref", "");
    kp.color = rgb_from_json(k.value("color", nlohmann::json()), kp.color);
    s.keyboard = kp;
  }
  const auto& cam = j.at("camera");
  if (cam.contains("intrinsics")) {
    const auto& in = cam.at("intrinsics");
    s.camera.intrinsics.fx = in.value("fx", 600.0);
    s.camera.intrinsics.fy = in.value("fy", 600.0);
    s.camera.intrinsics.cx = in.value("cx", 320.0);
    s.camera.intrinsics.cy = in.value("cy", 240.0);
    s.camera.intrinsics.width = in.value("width", 640);
    s.camera.intrinsics.height = in.value("height", 480);
  }
  const auto& ex = cam.at("extrinsics");
  if (ex.contains("eye"))
    s.camera.extrinsics = CameraModel::look_at(vec3_from_json(ex.at("eye")), vec3_from_json(ex.at("target")));
  else
    s.camera.extrinsics = pose_from_json(ex);
  s.camera.rate = cam.value("rate", 30.0);
  if (j.contains("arm_base_pose")) s.arm_base_pose = pose_from_json(j.at("arm_base_pose"));
  if (j.contains("floor_z")) s.floor_z = j.at("floor_z").get<double>();
  if (j.contains("working_area")) s.working_area = aabb_from_json(j.at("working_area"));
  s.validate();
  return s;
}

inline nlohmann::json scene_to_json(const Scene& s) {
  using namespace detail;
  nlohmann::json j;
  j["schema"] = kSceneSchemaVersion;
  j["static_boxes"] = nlohmann::json::array();
  for (const auto& b : s.static_boxes)
    j["static_boxes"].push_back({{"label", b.label},
                                 {"pose", pose_to_json(b.box.pose)},
                                 {"size", vec3_to_json(2.0 * b.box.half_extents)},
                                 {"physical", b.physical},
                                 {"color", rgb_to_json(b.color)}});
  j["objects"] = nlohmann::json::array();
  for (const auto& o : s.objects)
    j["objects"].push_back({{"name", o.name},
                            {"shape", to_string(o.shape)},
                            {"pose", pose_to_json(o.pose)},
                            {"dimensions", vec3_to_json(o.dimensions)},
                            {"graspable", o.graspable},
                            {"color", rgb_to_json(o.color)}});
  if (s.keyboard)
    j["keyboard"] = {{"pose", pose_to_json(s.keyboard->pose)},
                     {"size", {s.keyboard->width, s.keyboard->height}},
                     {"layout_ref", s.keyboard->layout_ref},
                     {"color", rgb_to_json(s.keyboard->color)}};
  const Intrinsics& in = s.camera.intrinsics;
  j["camera"] = {{"intrinsics",
                  {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy}, {"width", in.width}, {"height", in.height}}},
                 {"extrinsics", pose_to_json(s.camera.extrinsics)},
                 {"rate", s.camera.rate}};
  j["arm_base_pose"] = pose_to_json(s.arm_base_pose);
  if (s.floor_z) j["floor_z"] = *s.floor_z;
  j["working_area"] = aabb_to_json(s.working_area);
  return j;
}

inline Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene " + path.string());
  try {
    return scene_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace lasertele
