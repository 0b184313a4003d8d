#include <gtest/gtest.h>

#include "vlipp/physics_check.hpp"
#include "vlipp/planner/mock.hpp"
#include "vlipp/planner/prompt.hpp"

using namespace vlipp;
using planner::PlannerMode;

namespace {

InputScene ball_scene(double cy = 10, double side = 20) {
  InputScene s;
  s.image = RgbImage(480, 720, 90);
  s.description = "a ball is dropped onto the floor";
  const BoundingBox b{100 - side / 2, cy - side / 2, side, side};
  s.objects.push_back({0, "ball", b, box_mask(480, 720, b)});
  return s;
}

std::vector<double> center_ys(const TrajectoryPlan& p, int id = 0) {
  std::vector<double> out;
  for (const auto& b : p.find(id)->boxes) out.push_back(b.center_y());
  return out;
}

}  // namespace

TEST(Prompt, FullModeHasThreeStepsAndContext) {
  const auto b = planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {true, true, true}, 12);
  EXPECT_EQ(b.cot_steps.size(), 3u);
  EXPECT_FALSE(b.law_context.empty());
  EXPECT_FALSE(b.image_payload.empty());
  EXPECT_NE(planner::serialize_prompt(b).find("[Physical context]"), std::string::npos);
}

TEST(Prompt, ContextOff) {
  const auto b = planner::build_prompt(ball_scene(), PhysicsLaw::optics, {true, false, true}, 12);
  EXPECT_TRUE(b.law_context.empty());
  EXPECT_EQ(b.cot_steps.size(), 3u);
  EXPECT_EQ(planner::serialize_prompt(b).find("[Physical context]"), std::string::npos);
}

TEST(Prompt, CotOffCollapsesToOneInstruction) {
  const auto b = planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {true, true, false}, 12);
  ASSERT_EQ(b.cot_steps.size(), 1u);
  EXPECT_EQ(b.cot_steps[0], planner::direct_instruction(12));
}

TEST(Prompt, AblationsOnlyRemoveText) {
  // Every ablated prompt is a strict shortening of the full one.
  const auto scene = ball_scene();
  for (auto law : all_laws) {
    const auto full = planner::serialize_prompt(planner::build_prompt(scene, law, {true, true, true}, 12));
    const auto no_ctx = planner::serialize_prompt(planner::build_prompt(scene, law, {true, false, true}, 12));
    const auto no_cot = planner::serialize_prompt(planner::build_prompt(scene, law, {true, true, false}, 12));
    const auto none = planner::serialize_prompt(planner::build_prompt(scene, law, {true, false, false}, 12));
    EXPECT_LT(no_ctx.size(), full.size());
    EXPECT_LT(no_cot.size(), full.size());
    EXPECT_LT(none.size(), no_ctx.size());
    EXPECT_LT(none.size(), no_cot.size());
    EXPECT_FALSE(planner::law_context_text(law).empty());
  }
}

TEST(Prompt, Preconditions) {
  EXPECT_THROW(planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {false, false, false}, 12), Error);
  EXPECT_THROW(planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {false, true, true}, 12), Error);
  EXPECT_THROW(planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {true, true, true}, 1), Error);
}

TEST(Prompt, SceneSummaryListsObjects) {
  const auto b = planner::build_prompt(ball_scene(), PhysicsLaw::gravity, {true, true, true}, 12);
  EXPECT_NE(b.scene_summary.find("ball"), std::string::npos);
  EXPECT_NE(b.scene_summary.find("720 x 480"), std::string::npos);
}

TEST(MockGravity, SpecParabola) {
  planner::MockParams p;
  p.gravity.g = 2;
  const auto plan = planner::mock_plan(ball_scene(10), PhysicsLaw::gravity, p, 5);
  EXPECT_EQ(center_ys(plan), (std::vector<double>{10, 11, 14, 19, 26}));
  EXPECT_TRUE(validate_plan(plan, nullptr).empty());
}

TEST(MockGravity, BounceAndRest) {
  // Floor at 60, box 20 tall: rest center 50. Free fall 10 + k^2 hits 50 at k = 7
  // (59 clamped), rebound speed 0.5 * 2 * 7 = 7 upward.
  planner::MockParams p;
  p.gravity.g = 2;
  p.gravity.restitution = 0.5;
  p.gravity.floor_y = 60;
  const auto ys = center_ys(planner::mock_plan(ball_scene(10), PhysicsLaw::gravity, p, 16));
  EXPECT_EQ(ys[6], 46.0);
  EXPECT_EQ(ys[7], 50.0);
  EXPECT_EQ(ys[8], 50.0 - 7 + 1);
  EXPECT_EQ(ys[9], 50.0 - 14 + 4);
  for (std::size_t k = 14; k < ys.size(); ++k) EXPECT_EQ(ys[k], 50.0);
  for (double y : ys) EXPECT_LE(y, 50.0);
}

TEST(MockGravity, ParameterGridPassesValidator) {
  for (double g : {1.0, 2.0, 4.0}) {
    for (double e : {0.0, 0.5, 1.0}) {
      planner::MockParams p;
      p.gravity.g = g;
      p.gravity.restitution = e;
      p.gravity.floor_y = 200;
      const auto plan = planner::mock_plan(ball_scene(40, 30), PhysicsLaw::gravity, p, 12);
      const auto r = check_gravity(plan, 0.15);
      EXPECT_EQ(r.overall(), CheckStatus::pass) << g << " " << e;
      EXPECT_EQ(r.find("gravity.track0.acceleration")->score, 1.0) << g << " " << e;
    }
  }
}

TEST(MockCollision, EqualMassExchange) {
  const auto out = planner::elastic_collision(1, 4, 1, 0);
  EXPECT_EQ(out.v1, 0.0);
  EXPECT_EQ(out.v2, 4.0);

  InputScene s = ball_scene(200);
  s.objects.push_back({1, "ball2", {140, 190, 20, 20}, box_mask(480, 720, {140, 190, 20, 20})});
  planner::MockParams p;
  p.collision.velocity = {{0, 4}};
  const auto plan = planner::mock_plan(s, PhysicsLaw::momentum_conservation, p, 12);
  const auto& a = plan.tracks[0].boxes;
  const auto& b = plan.tracks[1].boxes;
  // Gap 30 closes at t = 7.5; afterwards ball 0 stops and ball 1 moves at 4.
  EXPECT_EQ(a[11].x, 90 + 30.0);
  EXPECT_EQ(b[11].x, 140 + 4 * 3.5);
  EXPECT_EQ(b[7].x, 140.0);
}

TEST(MockConstant, ArithmeticX) {
  const auto plan = planner::constant_velocity_plan(ball_scene(), PhysicsLaw::gravity, 3, 0, 6);
  const auto& b = plan.tracks[0].boxes;
  for (std::size_t k = 1; k < b.size(); ++k) EXPECT_EQ(b[k].x - b[k - 1].x, 3.0);
  EXPECT_EQ(plan.law, PhysicsLaw::gravity);
  EXPECT_TRUE(validate_plan(plan, nullptr).empty());
}

TEST(MockFallback, Laws) {
  planner::MockParams p;
  p.allow_fallback = false;
  EXPECT_THROW(planner::mock_plan(ball_scene(), PhysicsLaw::optics, p, 12), Error);
  p.allow_fallback = true;
  p.constant = {0, -2};
  const auto plan = planner::mock_plan(ball_scene(200), PhysicsLaw::fluid_mechanics, p, 12);
  EXPECT_EQ(plan.tracks[0].boxes[11].y, 190.0 - 22);
}
