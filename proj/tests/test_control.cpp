#include "lasertele/control/controller.hpp"
#include "lasertele/scene/defaults.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lasertele;

namespace {

constexpr double kDt = 1.0 / 30.0;

LaserEstimate at(const Vec3& p, double stamp = 0.0) {
  LaserEstimate e;
  e.point_base = p;
  e.raw_point = p;
  e.valid = true;
  e.stamp = stamp;
  return e;
}

struct Rig {
  KeyboardLayout layout = make_layout(default_scene().keyboard->pose, default_buttons());
  Controller controller{layout};
  WorkspaceBounds bounds;
  ControllerState state;
  int tick = 0;

  double now() const { return tick * kDt; }

  UpdateResult step(const LaserEstimate& est) {
    Region r = controller.classify(est, bounds);
    UpdateResult out = controller.update(state, r, est, now());
    ++tick;
    return out;
  }
  UpdateResult step(const Vec3& p) { return step(at(p, now())); }
  Vec3 button(ButtonAction a) const { return layout.button_center(layout.find(a)); }
};

const Vec3 kTablePoint(0.1, 0.5, 0.05);

bool has_event(const UpdateResult& r, const std::string& type) {
  for (const auto& e : r.events)
    if (e.type == type) return true;
  return false;
}

}  // namespace

TEST(Classify, RegionsFollowTheLayoutAndBounds) {
  Rig rig;
  for (int i = 0; i < 10; ++i) {
    Region r = rig.controller.classify(at(rig.layout.button_center(i)), rig.bounds);
    EXPECT_EQ(r.kind, RegionKind::Keyboard);
    EXPECT_EQ(r.button, i);
  }
  // Button edges are inside (closed rectangles).
  const Button& b = rig.layout.buttons[0];
  Button unit{"u", ButtonAction::LinXPos, 0.0, 0.0, 0.1, 0.2};
  EXPECT_TRUE(unit.contains(0.05, -0.1));
  EXPECT_FALSE(unit.contains(0.05 + 1e-9, 0.0));
  Vec3 edge = rig.layout.pose.apply({b.cx + 0.5 * b.width - 1e-9, b.cy + 0.5 * b.height - 1e-9, 0.0});
  EXPECT_EQ(rig.controller.classify(at(edge), rig.bounds).button, 0);
  // The gap between the two columns is table, not a button.
  Vec3 gap = rig.layout.pose.apply({0.0, b.cy, 0.0});
  EXPECT_EQ(rig.controller.classify(at(gap), rig.bounds).kind, RegionKind::Environment);
  // Off the keyboard plane.
  Vec3 above = rig.layout.button_center(0) + Vec3(0, 0, 0.05);
  EXPECT_EQ(rig.controller.classify(at(above), rig.bounds).kind, RegionKind::Environment);
  EXPECT_EQ(rig.controller.classify(at(kTablePoint), rig.bounds).kind, RegionKind::Environment);
  EXPECT_EQ(rig.controller.classify(at({2.0, 0.0, 0.0}), rig.bounds).kind, RegionKind::Outside);
  LaserEstimate none;
  EXPECT_EQ(rig.controller.classify(none, rig.bounds).kind, RegionKind::Outside);
}

TEST(EnvDwell, FiresAtThreeSecondsExactly) {
  Rig rig;
  int fired_at = -1;
  for (int k = 0; k < 200; ++k) {
    UpdateResult r = rig.step(kTablePoint);
    if (r.command) {
      ASSERT_EQ(fired_at, -1) << "second command at tick " << k;
      fired_at = k;
      ASSERT_TRUE(std::holds_alternative<GoalPoseCommand>(*r.command));
      const auto& g = std::get<GoalPoseCommand>(*r.command);
      EXPECT_EQ(g.pose.position, kTablePoint);
      EXPECT_EQ(g.pose.orientation.coeffs(), top_grasp_orientation().coeffs());
      EXPECT_TRUE(has_event(r, "goal_selected"));
    }
    if (k < 90) EXPECT_NE(rig.state.mode, Mode::ExecutingTrajectory);
  }
  EXPECT_EQ(fired_at, 90);
  EXPECT_EQ(rig.state.mode, Mode::ExecutingTrajectory);
}

TEST(EnvDwell, ProgressIsMonotoneAndReachesOne) {
  Rig rig;
  double last = -1.0;
  for (int k = 0; k < 90; ++k) {
    rig.step(kTablePoint);
    EXPECT_EQ(rig.state.mode, Mode::DwellEnv);
    EXPECT_GT(rig.state.env.progress, last);
    EXPECT_NEAR(rig.state.env.progress, k * kDt / 3.0, 1e-6);
    last = rig.state.env.progress;
  }
}

TEST(EnvDwell, JitterInsideRadiusStillFires) {
  Rig rig;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.006);
  int fired_at = -1;
  for (int k = 0; k < 120 && fired_at < 0; ++k) {
    Vec3 j(n(rng), n(rng), 0.0);
    if (j.norm() > 0.019) j *= 0.019 / j.norm();  // any two samples stay within 0.04
    if (k == 0) j.setZero();
    if (rig.step(kTablePoint + j).command) fired_at = k;
  }
  EXPECT_EQ(fired_at, 90);
}

TEST(EnvDwell, ExcursionAtTwoPointNineRestarts) {
  Rig rig;
  const int excursion = 87;  // t = 2.9 s
  int fired_at = -1;
  for (int k = 0; k < 300 && fired_at < 0; ++k) {
    Vec3 p = k == excursion ? kTablePoint + Vec3(0.05, 0, 0) : kTablePoint;
    UpdateResult r = rig.step(p);
    if (k == excursion) EXPECT_TRUE(has_event(r, "dwell_reset"));
    if (r.command) fired_at = k;
  }
  // New anchor at the first sample after the excursion.
  EXPECT_EQ(fired_at, excursion + 1 + 90);
}

TEST(EnvDwell, StayingOnTheGoalDoesNotRefireUntilTheLaserMoves) {
  Rig rig;
  int goals = 0;
  for (int k = 0; k < 600; ++k)
    if (auto r = rig.step(kTablePoint); r.command) ++goals;
  EXPECT_EQ(goals, 1);
  // The single sample away anchors a dwell of its own; returning is an
  // excursion from it, so the next anchor is the sample after the return.
  rig.step(kTablePoint + Vec3(0.1, 0, 0));
  int fired_at = -1;
  for (int k = 0; k < 120 && fired_at < 0; ++k)
    if (rig.step(kTablePoint).command) fired_at = k;
  EXPECT_EQ(fired_at, 91);
}

TEST(EnvDwell, LeavingTheWorkspaceResets) {
  Rig rig;
  for (int k = 0; k < 60; ++k) rig.step(kTablePoint);
  auto r = rig.step(LaserEstimate{});
  EXPECT_TRUE(has_event(r, "dwell_reset"));
  EXPECT_EQ(rig.state.mode, Mode::Idle);
  int fired_at = -1;
  for (int k = 0; k < 120 && fired_at < 0; ++k)
    if (rig.step(kTablePoint).command) fired_at = k;
  EXPECT_EQ(fired_at, 90);
}

TEST(Keyboard, EveryButtonTriggersAfterOneSecond) {
  for (ButtonAction a : kAllButtonActions) {
    Rig rig;
    int fired_at = -1;
    RobotCommand cmd;
    for (int k = 0; k < 60 && fired_at < 0; ++k) {
      UpdateResult r = rig.step(rig.button(a));
      if (k < 30) EXPECT_EQ(rig.state.mode, Mode::DwellButton);
      if (r.command) fired_at = k, cmd = *r.command;
    }
    ASSERT_EQ(fired_at, 30) << to_string(a);
    if (is_gripper_action(a)) {
      ASSERT_TRUE(std::holds_alternative<GripperActionCommand>(cmd));
      EXPECT_EQ(std::get<GripperActionCommand>(cmd).close, a == ButtonAction::GripClose);
      EXPECT_EQ(rig.state.mode, Mode::GripperActing);
    } else {
      ASSERT_TRUE(std::holds_alternative<VelocityCommand>(cmd));
      const Twist& t = std::get<VelocityCommand>(cmd).twist;
      bool angular = a == ButtonAction::YawPos || a == ButtonAction::YawNeg;
      EXPECT_NEAR(t.linear.norm(), angular ? 0.0 : 0.025, 1e-15) << to_string(a);
      EXPECT_NEAR(t.angular.norm(), angular ? 0.25 : 0.0, 1e-15) << to_string(a);
      EXPECT_EQ(rig.state.mode, Mode::ButtonHeld);
    }
  }
}

TEST(Keyboard, TwistDirections) {
  const double l = 0.025, w = 0.25;
  EXPECT_EQ(button_twist(ButtonAction::LinXPos, l, w).linear, Vec3(l, 0, 0));
  EXPECT_EQ(button_twist(ButtonAction::LinXNeg, l, w).linear, Vec3(-l, 0, 0));
  EXPECT_EQ(button_twist(ButtonAction::LinYPos, l, w).linear, Vec3(0, l, 0));
  EXPECT_EQ(button_twist(ButtonAction::LinYNeg, l, w).linear, Vec3(0, -l, 0));
  EXPECT_EQ(button_twist(ButtonAction::LinZPos, l, w).linear, Vec3(0, 0, l));
  EXPECT_EQ(button_twist(ButtonAction::LinZNeg, l, w).linear, Vec3(0, 0, -l));
  EXPECT_EQ(button_twist(ButtonAction::YawPos, l, w).angular, Vec3(0, 0, w));
  EXPECT_EQ(button_twist(ButtonAction::YawNeg, l, w).angular, Vec3(0, 0, -w));
}

TEST(Keyboard, HeldButtonStreamsVelocityAndStopsOnExit) {
  Rig rig;
  Vec3 p = rig.button(ButtonAction::LinZPos);
  for (int k = 0; k < 30; ++k) EXPECT_FALSE(rig.step(p).command);
  for (int k = 0; k < 45; ++k) {
    auto r = rig.step(p);
    ASSERT_TRUE(r.command);
    ASSERT_TRUE(std::holds_alternative<VelocityCommand>(*r.command));
    EXPECT_EQ(std::get<VelocityCommand>(*r.command).twist.linear, Vec3(0, 0, 0.025));
  }
  auto r = rig.step(kTablePoint);
  ASSERT_TRUE(r.command);
  EXPECT_TRUE(std::holds_alternative<StopCommand>(*r.command));
  EXPECT_TRUE(has_event(r, "button_released"));
  for (int k = 0; k < 30; ++k) EXPECT_FALSE(rig.step(kTablePoint).command);
}

TEST(Keyboard, MovingToAnotherButtonStopsAndRestartsTheDwell) {
  Rig rig;
  for (int k = 0; k < 31; ++k) rig.step(rig.button(ButtonAction::LinXPos));
  ASSERT_EQ(rig.state.mode, Mode::ButtonHeld);
  auto r = rig.step(rig.button(ButtonAction::LinXNeg));
  ASSERT_TRUE(r.command);
  EXPECT_TRUE(std::holds_alternative<StopCommand>(*r.command));
  EXPECT_EQ(rig.state.mode, Mode::DwellButton);
  int fired_at = -1;
  for (int k = 1; k < 60 && fired_at < 0; ++k)
    if (auto s = rig.step(rig.button(ButtonAction::LinXNeg)); s.command) fired_at = k;
  EXPECT_EQ(fired_at, 30);
}

TEST(Keyboard, GripperButtonIsEdgeTriggered) {
  Rig rig;
  Vec3 p = rig.button(ButtonAction::GripClose);
  int count = 0;
  for (int k = 0; k < 300; ++k) {
    if (k == 45) rig.controller.notify(rig.state, Feedback::GripperDone);
    if (rig.step(p).command) ++count;
  }
  EXPECT_EQ(count, 1);
  rig.step(kTablePoint);
  int fired_at = -1;
  for (int k = 0; k < 60 && fired_at < 0; ++k)
    if (rig.step(p).command) fired_at = k;
  EXPECT_EQ(fired_at, 30);
}

TEST(Keyboard, ShortVisitsNeverTrigger) {
  Rig rig;
  for (int rep = 0; rep < 10; ++rep) {
    for (int k = 0; k < 29; ++k) EXPECT_FALSE(rig.step(rig.button(ButtonAction::YawPos)).command);
    EXPECT_FALSE(rig.step(kTablePoint).command);
  }
}

TEST(Preemption, ButtonStopsTheTrajectoryThenActs) {
  Rig rig;
  for (int k = 0; k <= 90; ++k) rig.step(kTablePoint);
  ASSERT_EQ(rig.state.mode, Mode::ExecutingTrajectory);
  Vec3 p = rig.button(ButtonAction::LinYPos);
  for (int k = 0; k < 30; ++k) {
    EXPECT_FALSE(rig.step(p).command);
    EXPECT_EQ(rig.state.mode, Mode::ExecutingTrajectory);
  }
  auto stop = rig.step(p);
  ASSERT_TRUE(stop.command);
  EXPECT_TRUE(std::holds_alternative<StopCommand>(*stop.command));
  EXPECT_TRUE(has_event(stop, "preempted"));
  auto next = rig.step(p);
  ASSERT_TRUE(next.command);
  EXPECT_TRUE(std::holds_alternative<VelocityCommand>(*next.command));
  EXPECT_EQ(rig.state.mode, Mode::ButtonHeld);
}

TEST(Preemption, NewEnvironmentGoalReplacesTheCurrentOne) {
  Rig rig;
  for (int k = 0; k <= 90; ++k) rig.step(kTablePoint);
  Vec3 other = kTablePoint + Vec3(-0.2, 0.1, 0);
  int fired_at = -1;
  for (int k = 0; k < 120 && fired_at < 0; ++k) {
    auto r = rig.step(other);
    if (r.command) {
      fired_at = k;
      EXPECT_TRUE(has_event(r, "goal_replaced"));
      EXPECT_EQ(std::get<GoalPoseCommand>(*r.command).pose.position, other);
    }
  }
  EXPECT_EQ(fired_at, 90);
}

TEST(Feedback, CompletionReturnsToIdle) {
  Rig rig;
  for (int k = 0; k <= 90; ++k) rig.step(kTablePoint);
  std::vector<ControlEvent> ev;
  rig.controller.notify(rig.state, Feedback::TrajectoryDone, &ev);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].type, "trajectory_done");
  EXPECT_EQ(rig.state.mode, Mode::Idle);
  rig.step(kTablePoint);
  EXPECT_EQ(rig.state.mode, Mode::Idle);  // disarmed on the reached goal
  for (int k = 0; k <= 90; ++k) rig.step(kTablePoint);
  rig.controller.notify(rig.state, Feedback::GoalRejected);
  EXPECT_EQ(rig.state.mode, Mode::Idle);
}

// Random laser itineraries. Every command must be justified by a completed
// dwell visible in the input history (checked without the controller).
TEST(Fuzz, EveryCommandHasACompletedDwellInItsHistory) {
  std::mt19937_64 rng(99);
  for (int run = 0; run < 20; ++run) {
    Rig rig;
    std::vector<LaserEstimate> hist;
    std::vector<Region> regions;
    std::vector<std::optional<RobotCommand>> cmds;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.004);
    int traj_done_at = -1, grip_done_at = -1;
    Vec3 target = kTablePoint;
    int hold = 0;
    for (int k = 0; k < 3000; ++k) {
      if (hold-- <= 0) {
        double pick = u(rng);
        if (pick < 0.45) target = rig.layout.button_center(int(u(rng) * 10));
        else if (pick < 0.9) target = Vec3(-0.3 + 0.7 * u(rng), 0.3 + 0.5 * u(rng), 0.1 * u(rng));
        else target = Vec3(3, 3, 3);
        hold = int(u(rng) * 150);
      }
      if (k == traj_done_at) rig.controller.notify(rig.state, Feedback::TrajectoryDone);
      if (k == grip_done_at) rig.controller.notify(rig.state, Feedback::GripperDone);
      LaserEstimate est = at(target + Vec3(jitter(rng), jitter(rng), 0.0), rig.now());
      if (target.x() > 2.0) est.valid = false;
      regions.push_back(rig.controller.classify(est, rig.bounds));
      hist.push_back(est);
      auto r = rig.step(est);
      cmds.push_back(r.command);
      if (r.command && std::holds_alternative<GoalPoseCommand>(*r.command)) traj_done_at = k + 1 + int(u(rng) * 90);
      if (r.command && std::holds_alternative<GripperActionCommand>(*r.command)) grip_done_at = k + 15;
    }

    auto env_dwell_ends_at = [&](int k) {
      for (int j = k; j >= 0; --j) {
        if (regions[j].kind != RegionKind::Environment) return false;
        for (int i = j; i <= k; ++i)
          if ((hist[i].point_base - hist[j].point_base).norm() > 0.04) goto next;
        if ((k - j) * kDt >= 3.0 - 1e-9) return true;
      next:;
      }
      return false;
    };
    auto button_dwell_ends_at = [&](int k, const std::function<bool(const Button&)>& ok) {
      if (k < 0 || regions[k].kind != RegionKind::Keyboard || !ok(rig.layout.buttons[regions[k].button])) return false;
      int j = k;
      while (j > 0 && regions[j - 1] == regions[k]) --j;
      return (k - j) * kDt >= 1.0 - 1e-9;
    };

    int goals = 0, buttons = 0;
    for (int k = 0; k < int(cmds.size()); ++k) {
      if (!cmds[k]) continue;
      const RobotCommand& c = *cmds[k];
      if (auto* g = std::get_if<GoalPoseCommand>(&c)) {
        ++goals;
        EXPECT_TRUE(env_dwell_ends_at(k)) << "run " << run << " tick " << k;
        EXPECT_EQ(g->pose.position, hist[k].point_base);
      } else if (auto* v = std::get_if<VelocityCommand>(&c)) {
        ++buttons;
        auto same = [&](const Button& b) { return button_twist(b.action, 0.025, 0.25) == v->twist; };
        EXPECT_TRUE(button_dwell_ends_at(k, same) || button_dwell_ends_at(k - 1, same)) << "run " << run << " tick " << k;
      } else if (auto* gr = std::get_if<GripperActionCommand>(&c)) {
        ++buttons;
        auto same = [&](const Button& b) { return is_gripper_action(b.action) && (b.action == ButtonAction::GripClose) == gr->close; };
        EXPECT_TRUE(button_dwell_ends_at(k, same) || button_dwell_ends_at(k - 1, same)) << "run " << run << " tick " << k;
      }
    }
    EXPECT_GT(goals + buttons, 0);
  }
}

TEST(Layout, DefaultHasTenDisjointButtons) {
  auto buttons = default_buttons();
  ASSERT_EQ(buttons.size(), 10u);
  KeyboardLayout l = make_layout(Pose(), buttons);
  for (ButtonAction a : kAllButtonActions) EXPECT_GE(l.find(a), 0);
  // Dense grid: no point lies in two buttons, and every button fits the panel.
  KeyboardPanel panel;
  for (double x = -0.13; x <= 0.13; x += 0.0025)
    for (double y = -0.28; y <= 0.28; y += 0.0025) {
      int n = 0;
      for (const auto& b : buttons) {
        if (!b.contains(x, y)) continue;
        ++n;
        EXPECT_LE(std::abs(x), 0.5 * panel.width);
        EXPECT_LE(std::abs(y), 0.5 * panel.height);
      }
      EXPECT_LE(n, 1);
    }
}

TEST(Layout, JsonRoundTripAndValidation) {
  auto buttons = default_buttons();
  nlohmann::json j = buttons_to_json(buttons);
  EXPECT_EQ(buttons_to_json(buttons_from_json(j)), j);
  EXPECT_EQ(buttons_to_json(load_buttons(std::string(LASERTELE_DATA_DIR) + "/keyboard_default.json")), j);
  nlohmann::json bad = j;
  bad["schema"] = 7;
  EXPECT_THROW(buttons_from_json(bad), std::invalid_argument);
  auto overlap = buttons;
  overlap[1].cx = overlap[0].cx + 0.01;
  EXPECT_THROW(make_layout(Pose(), overlap), std::invalid_argument);
  auto dup = buttons;
  dup[1].id = dup[0].id;
  EXPECT_THROW(make_layout(Pose(), dup), std::invalid_argument);
  bad = j;
  bad["buttons"][0]["action"] = "WARP";
  EXPECT_THROW(buttons_from_json(bad), std::invalid_argument);
}
