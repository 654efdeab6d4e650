#pragma once

#include "lasertele/kinematics/arm_model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lasertele {

enum class ButtonAction { LinXPos, LinXNeg, LinYPos, LinYNeg, LinZPos, LinZNeg, YawPos, YawNeg, GripOpen, GripClose };

inline constexpr std::array<ButtonAction, 10> kAllButtonActions = {
    ButtonAction::LinXPos, ButtonAction::LinXNeg, ButtonAction::LinYPos, ButtonAction::LinYNeg,
    ButtonAction::LinZPos, ButtonAction::LinZNeg, ButtonAction::YawPos,  ButtonAction::YawNeg,
    ButtonAction::GripOpen, ButtonAction::GripClose};

inline std::string to_string(ButtonAction a) {
  switch (a) {
    case ButtonAction::LinXPos: return "LIN_X+";
    case ButtonAction::LinXNeg: return "LIN_X-";
    case ButtonAction::LinYPos: return "LIN_Y+";
    case ButtonAction::LinYNeg: return "LIN_Y-";
    case ButtonAction::LinZPos: return "LIN_Z+";
    case ButtonAction::LinZNeg: return "LIN_Z-";
    case ButtonAction::YawPos: return "YAW+";
    case ButtonAction::YawNeg: return "YAW-";
    case ButtonAction::GripOpen: return "GRIP_OPEN";
    case ButtonAction::GripClose: return "GRIP_CLOSE";
  }
  return "?";
}

inline ButtonAction button_action_from_string(const std::string& s) {
  for (auto a : kAllButtonActions)
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown button action '" + s + "'");
}

inline bool is_gripper_action(ButtonAction a) { return a == ButtonAction::GripOpen || a == ButtonAction::GripClose; }

/// Velocity commanded by a held button: one nonzero axis of the given magnitude.
inline Twist button_twist(ButtonAction a, double linear_speed, double angular_speed) {
  Twist t;
  switch (a) {
    case ButtonAction::LinXPos: t.linear.x() = linear_speed; break;
    case ButtonAction::LinXNeg: t.linear.x() = -linear_speed; break;
    case ButtonAction::LinYPos: t.linear.y() = linear_speed; break;
    case ButtonAction::LinYNeg: t.linear.y() = -linear_speed; break;
    case ButtonAction::LinZPos: t.linear.z() = linear_speed; break;
    case ButtonAction::LinZNeg: t.linear.z() = -linear_speed; break;
    case ButtonAction::YawPos: t.angular.z() = angular_speed; break;
    case ButtonAction::YawNeg: t.angular.z() = -angular_speed; break;
    default: break;
  }
  return t;
}

/// Rectangle in the keyboard_base xy plane.
struct Button {
  std::string id;
  ButtonAction action = ButtonAction::LinXPos;
  double cx = 0.0, cy = 0.0;  // m
  double width = 0.105, height = 0.099;

  bool contains(double x, double y) const {
    return std::abs(x - cx) <= 0.5 * width && std::abs(y - cy) <= 0.5 * height;
  }
};

struct KeyboardLayout {
  Pose pose;  // keyboard_base in base_link
  std::vector<Button> buttons;

  int find(const std::string& id) const {
    for (int i = 0; i < int(buttons.size()); ++i)
      if (buttons[i].id == id) return i;
    return -1;
  }
  int find(ButtonAction a) const {
    for (int i = 0; i < int(buttons.size()); ++i)
      if (buttons[i].action == a) return i;
    return -1;
  }
  /// Button center in base_link.
  Vec3 button_center(int i) const { return pose.apply({buttons[i].cx, buttons[i].cy, 0.0}); }

  void validate() const {
    for (std::size_t i = 0; i < buttons.size(); ++i) {
      const Button& a = buttons[i];
      if (!(a.width > 0 && a.height > 0)) throw std::invalid_argument("button " + a.id + ": size must be > 0");
      for (std::size_t j = i + 1; j < buttons.size(); ++j) {
        const Button& b = buttons[j];
        if (a.id == b.id) throw std::invalid_argument("duplicate button id " + a.id);
        bool apart = std::abs(a.cx - b.cx) > 0.5 * (a.width + b.width) || std::abs(a.cy - b.cy) > 0.5 * (a.height + b.height);
        if (!apart) throw std::invalid_argument("buttons " + a.id + " and " + b.id + " overlap");
      }
    }
  }
};

/// Ten 0.105 x 0.099 m buttons in five rows of two, 0.01 m gaps.
inline std::vector<Button> default_buttons() {
  const double w = 0.105, h = 0.099, gap = 0.01;
  const double col = 0.5 * (w + gap);
  const std::array<std::array<ButtonAction, 2>, 5> rows = {{{ButtonAction::LinXPos, ButtonAction::LinXNeg},
                                                            {ButtonAction::LinYPos, ButtonAction::LinYNeg},
                                                            {ButtonAction::LinZPos, ButtonAction::LinZNeg},
                                                            {ButtonAction::YawPos, ButtonAction::YawNeg},
                                                            {ButtonAction::GripOpen, ButtonAction::GripClose}}};
  std::vector<Button> out;
  for (int r = 0; r < 5; ++r) {
    double cy = (2 - r) * (h + gap);
    for (int c = 0; c < 2; ++c) {
      ButtonAction a = rows[r][c];
      out.push_back({to_string(a), a, c == 0 ? -col : col, cy, w, h});
    }
  }
  return out;
}

// --- layout file ---------------------------------------------------------

inline constexpr int kKeyboardSchemaVersion = 1;

inline std::vector<Button> buttons_from_json(const nlohmann::json& j) {
  if (j.value("schema", 0) != kKeyboardSchemaVersion) throw std::invalid_argument("keyboard layout: unsupported schema version");
  std::vector<Button> out;
  for (const auto& b : j.at("buttons")) {
    Button btn;
    btn.action = button_action_from_string(b.at("action").get<std::string>());
    btn.id = b.value("id", to_string(btn.action));
    btn.cx = b.at("center").at(0).get<double>();
    btn.cy = b.at("center").at(1).get<double>();
    if (b.contains("size")) {
      btn.width = b.at("size").at(0).get<double>();
      btn.height = b.at("size").at(1).get<double>();
    }
    out.push_back(btn);
  }
  return out;
}

inline nlohmann::json buttons_to_json(const std::vector<Button>& buttons) {
  nlohmann::json j;
  j["schema"] = kKeyboardSchemaVersion;
  j["buttons"] = nlohmann::json::array();
  for (const auto& b : buttons)
    j["buttons"].push_back(
        {{"id", b.id}, {"action", to_string(b.action)}, {"center", {b.cx, b.cy}}, {"size", {b.width, b.height}}});
  return j;
}

inline std::vector<Button> load_buttons(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open keyboard layout " + path);
  try {
    return buttons_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline KeyboardLayout make_layout(const Pose& keyboard_pose, std::vector<Button> buttons) {
  KeyboardLayout l{keyboard_pose, std::move(buttons)};
  l.validate();
  return l;
}

}  // namespace lasertele
