#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vlipp/physics_check.hpp"
#include "vlipp/planner/mock.hpp"
#include "vlipp/trajectory.hpp"

using namespace vlipp;

namespace {

InputScene scene_with(std::vector<BoundingBox> boxes, int H = 480, int W = 720) {
  InputScene s;
  s.image = RgbImage(H, W, 100);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    s.objects.push_back({static_cast<int>(i), "obj" + std::to_string(i), boxes[i], box_mask(H, W, boxes[i])});
  }
  return s;
}

TrajectoryPlan track_plan(PhysicsLaw law, const std::vector<std::vector<BoundingBox>>& tracks) {
  TrajectoryPlan p;
  p.law = law;
  p.width = 720;
  p.height = 480;
  p.keyframe_count = static_cast<int>(tracks.front().size());
  for (std::size_t i = 0; i < tracks.size(); ++i) p.tracks.push_back({static_cast<int>(i), "o", tracks[i]});
  return p;
}

std::vector<BoundingBox> from_centers_y(const std::vector<double>& cy, double cx = 100, double s = 20) {
  std::vector<BoundingBox> out;
  for (double y : cy) out.push_back({cx - s / 2, y - s / 2, s, s});
  return out;
}

}  // namespace

TEST(Gravity, MockParabolaScoresOne) {
  planner::MockParams p;
  p.gravity.g = 2.0;
  const auto plan = planner::mock_plan(scene_with({{90, 0, 20, 20}}), PhysicsLaw::gravity, p, 12);
  const auto& b = plan.tracks[0].boxes;
  for (std::size_t k = 1; k + 1 < b.size(); ++k) {
    EXPECT_EQ(b[k + 1].center_y() - 2 * b[k].center_y() + b[k - 1].center_y(), 2.0);
  }
  const auto r = check_gravity(plan, 0.15);
  EXPECT_EQ(r.overall(), CheckStatus::pass);
  EXPECT_EQ(r.find("gravity.track0.acceleration")->score, 1.0);
}

TEST(Gravity, ConstantVerticalVelocityFails) {
  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y({10, 13, 16, 19, 22, 25})});
  const auto r = check_gravity(plan, 0.15);
  EXPECT_EQ(r.overall(), CheckStatus::fail);
  EXPECT_EQ(r.find("gravity.track0.acceleration")->message, "no acceleration");
}

TEST(Gravity, JitteredParabola) {
  // Second differences 2 * (1 + 5% noise): relative spread lands near 0.05.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> y{10.0};
  double v = 1.0;
  std::vector<double> acc;
  for (int k = 0; k < 11; ++k) {
    const double a = 2.0 * (1.0 + 0.05 * u(rng));
    acc.push_back(a);
    y.push_back(y.back() + v);
    v += a;
  }
  // Oracle: sample (n - 1) CV of the injected accelerations; the last one never reaches the track.
  acc.pop_back();
  double mean = 0, var = 0;
  for (double a : acc) mean += a / acc.size();
  for (double a : acc) var += (a - mean) * (a - mean) / (acc.size() - 1);
  const double cv = std::sqrt(var) / mean;
  ASSERT_GT(cv, 0.01);
  ASSERT_LT(cv, 0.15);

  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y(y)});
  const auto pass = check_gravity(plan, 0.15);
  EXPECT_EQ(pass.overall(), CheckStatus::pass);
  EXPECT_NEAR(pass.find("gravity.track0.acceleration")->score, 1.0 - cv, 1e-9);
  EXPECT_EQ(check_gravity(plan, 0.01).overall(), CheckStatus::fail);
}

TEST(Gravity, UpwardAccelerationFails) {
  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y({100, 98, 94, 88, 80, 70})});
  const auto r = check_gravity(plan, 0.15);
  EXPECT_EQ(r.find("gravity.track0.acceleration")->message, "vertical acceleration is not consistently downward");
}

TEST(Gravity, BounceSegmentOnly) {
  // Falls with a = 2, bounces at index 4 and rises; only frames 0..3 count.
  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y({10, 11, 14, 19, 26, 20, 16})});
  EXPECT_EQ(check_gravity(plan, 0.15).overall(), CheckStatus::pass);
}

TEST(Gravity, StaticTrackWarns) {
  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y({10, 10, 10, 10, 10})});
  EXPECT_EQ(check_gravity(plan, 0.15).overall(), CheckStatus::warn);
}

TEST(Gravity, WrongLawOrShortTrackThrows) {
  EXPECT_THROW(check_gravity(track_plan(PhysicsLaw::optics, {from_centers_y({1, 2, 4, 7})}), 0.1), Error);
  EXPECT_THROW(check_gravity(track_plan(PhysicsLaw::gravity, {from_centers_y({1, 2, 4})}), 0.1), Error);
}

TEST(Gravity, HorizontalDriftMustBeSteady) {
  auto boxes = from_centers_y({10, 11, 14, 19, 26, 35});
  const double dx[] = {0, 3, 3, 9, 9, 15};
  for (std::size_t k = 0; k < boxes.size(); ++k) boxes[k].x += dx[k];
  const auto r = check_gravity(track_plan(PhysicsLaw::gravity, {boxes}), 0.15);
  EXPECT_EQ(r.find("gravity.track0.horizontal_drift")->status, CheckStatus::fail);
}

TEST(Gravity, ReportIsPure) {
  const auto plan = track_plan(PhysicsLaw::gravity, {from_centers_y({10, 11, 14, 19, 26, 20, 16})});
  EXPECT_EQ(to_json(check_gravity(plan, 0.15)), to_json(check_gravity(plan, 0.15)));
}

namespace {

TrajectoryPlan collision_plan(double m1, double v1, double m2, double v2) {
  planner::MockParams p;
  p.collision.velocity = {{0, v1}, {1, v2}};
  p.collision.mass = {{0, m1}, {1, m2}};
  return planner::mock_plan(scene_with({{40, 200, 40, 40}, {100, 200, 40, 40}}), PhysicsLaw::momentum_conservation,
                            p, 12);
}

}  // namespace

TEST(Momentum, EqualMassExchange) {
  const auto plan = collision_plan(1, 4, 1, 0);
  MomentumResult detail;
  const auto r = check_momentum(plan, {}, 0.05, &detail);
  EXPECT_EQ(r.overall(), CheckStatus::pass);
  ASSERT_TRUE(detail.contact_frame.has_value());
  EXPECT_EQ(detail.error_x, 0.0);
  EXPECT_EQ(detail.error_y, 0.0);
}

TEST(Momentum, UnequalMassElastic) {
  // v1' = (2-1)*3/3 = 1, v2' = 2*2*3/3 = 4; momentum 2*3 = 2*1 + 1*4.
  const auto out = planner::elastic_collision(2, 3, 1, 0);
  EXPECT_DOUBLE_EQ(out.v1, 1.0);
  EXPECT_DOUBLE_EQ(out.v2, 4.0);
  const auto plan = collision_plan(2, 3, 1, 0);
  const auto r = check_momentum(plan, {{0, 2.0}, {1, 1.0}}, 0.05);
  EXPECT_EQ(r.overall(), CheckStatus::pass);
}

TEST(Momentum, StopDeadFails) {
  // Ball 0 closes the gap, then both stop.
  std::vector<BoundingBox> a, b;
  for (int k = 0; k < 12; ++k) {
    const double x = std::min(40.0 + 10.0 * k, 110.0);
    a.push_back({x, 200, 40, 40});
    b.push_back({150, 200, 40, 40});
  }
  const auto plan = track_plan(PhysicsLaw::momentum_conservation, {a, b});
  EXPECT_EQ(check_momentum(plan, {}, 0.05).overall(), CheckStatus::fail);
}

TEST(Momentum, NoContactWarns) {
  const auto plan = collision_plan(1, 0, 1, 0);
  const auto r = check_momentum(plan, {}, 0.05);
  EXPECT_EQ(r.overall(), CheckStatus::warn);
  EXPECT_EQ(r.checks[0].message, "no collision detected");
}

TEST(Momentum, NonpositiveMassThrows) {
  const auto plan = collision_plan(1, 4, 1, 0);
  EXPECT_THROW(check_momentum(plan, {{0, 0.0}}, 0.05), Error);
}

TEST(Shape, MeltingAreas) {
  std::vector<BoundingBox> shrinking, growing;
  for (int k = 0; k < 6; ++k) {
    const double side = std::sqrt(100.0 - 10.0 * k);  // areas 100, 90, 80, ...
    shrinking.push_back({50, 50, side, side});
    growing.push_back({50, 50, 10.0 + k, 10.0 + k});
  }
  auto r = check_containment_and_shape(track_plan(PhysicsLaw::thermodynamics, {shrinking}), 720, 480,
                                       PhysicsLaw::thermodynamics, {true});
  EXPECT_EQ(r.find("shape.melting")->status, CheckStatus::pass);
  r = check_containment_and_shape(track_plan(PhysicsLaw::thermodynamics, {growing}), 720, 480,
                                  PhysicsLaw::thermodynamics, {true});
  EXPECT_EQ(r.find("shape.melting")->status, CheckStatus::warn);
}

TEST(Shape, OutOfBoundsWarns) {
  std::vector<BoundingBox> boxes(10, BoundingBox{100, 100, 20, 20});
  boxes[7].x = -50;
  const auto r = check_containment_and_shape(track_plan(PhysicsLaw::optics, {boxes}), 720, 480, PhysicsLaw::optics);
  const auto* c = r.find("containment");
  EXPECT_EQ(c->status, CheckStatus::warn);
  EXPECT_NE(c->message.find("out of bounds, frame 7"), std::string::npos);
  EXPECT_NE(r.overall(), CheckStatus::fail);
}

TEST(Shape, FluidNeedsMonotoneChange) {
  std::vector<BoundingBox> rising, still(6, BoundingBox{10, 10, 10, 10});
  for (int k = 0; k < 6; ++k) rising.push_back({10, 100.0 - 5 * k, 10, 10.0 + 5 * k});
  EXPECT_EQ(check_containment_and_shape(track_plan(PhysicsLaw::fluid_mechanics, {rising}), 720, 480,
                                        PhysicsLaw::fluid_mechanics)
                .find("shape.fluid")
                ->status,
            CheckStatus::pass);
  EXPECT_EQ(check_containment_and_shape(track_plan(PhysicsLaw::fluid_mechanics, {still}), 720, 480,
                                        PhysicsLaw::fluid_mechanics)
                .find("shape.fluid")
                ->status,
            CheckStatus::warn);
}
