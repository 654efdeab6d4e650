#pragma once

#include "lasertele/scene/scene.hpp"

namespace lasertele {

/// Desk setup: arm base at the origin on a 1.5 x 1.2 m table, the user
/// seated at the +x front corner (virtual planning box), the paper keyboard
/// lying on the -x side of the table and a camera facing the arm from +y.
inline Scene default_scene() {
  Scene s;
  StaticBox table;
  table.label = "table";
  table.box = Box{Pose({0.0, 0.35, -0.02}, Quat::Identity()), {0.75, 0.60, 0.02}};
  table.color = {150, 120, 95};
  s.static_boxes.push_back(table);

  StaticBox user;
  user.label = "user_bbox";
  user.box = Box{Pose({0.60, -0.35, 0.65}, Quat::Identity()), {0.25, 0.25, 0.65}};
  user.physical = false;
  s.static_boxes.push_back(user);

  KeyboardPanel kb;
  kb.pose = Pose({-0.50, 0.55, 0.001}, Quat::Identity());
  kb.layout_ref = "keyboard_default.json";
  s.keyboard = kb;

  s.camera.extrinsics = CameraModel::look_at({0.0, 1.2, 1.3}, {0.0, 0.45, 0.0});
  s.floor_z = -0.75;
  return s;
}

/// Head position of the seated user (laser origin).
inline Vec3 default_head_position() { return {0.60, -0.35, 1.20}; }

}  // namespace lasertele
