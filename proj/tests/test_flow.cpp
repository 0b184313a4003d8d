#include <gtest/gtest.h>

#include <random>

#include "vlipp/flow.hpp"

using namespace vlipp;

namespace {

InputScene block_scene(BoundingBox box, int H = 48, int W = 64) {
  InputScene s;
  s.image = RgbImage(H, W, 60);
  s.objects.push_back({0, "block", box, box_mask(H, W, box)});
  return s;
}

InterpolatedTrajectory pair(BoundingBox a, BoundingBox b) {
  InterpolatedTrajectory t;
  t.law = PhysicsLaw::optics;
  t.width = 64;
  t.height = 48;
  t.keyframe_count = 2;
  t.frame_count = 2;
  t.tracks.push_back({0, "block", {a, b}});
  return t;
}

RgbImage textured(int H, int W, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  RgbImage img(H, W);
  for (auto& v : img.storage()) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

}  // namespace

TEST(AnalyticFlow, TranslationInsideBoxOnly) {
  const BoundingBox b0{10, 8, 12, 10};
  const auto f = analytic_flow(pair(b0, {13, 8, 12, 10}), block_scene(b0), 0);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool inside = x >= 10 && x < 22 && y >= 8 && y < 18;
      EXPECT_EQ(f.dx.at(y, x), inside ? 3.0f : 0.0f) << y << "," << x;
      EXPECT_EQ(f.dy.at(y, x), 0.0f);
    }
}

TEST(AnalyticFlow, ScaleAboutCorner) {
  // Width 8 -> 16 at fixed x: a pixel at 14 maps to 10 + 2 * 4 = 18.
  const BoundingBox b0{10, 8, 8, 8};
  const auto f = analytic_flow(pair(b0, {10, 8, 16, 8}), block_scene(b0), 0);
  EXPECT_FLOAT_EQ(f.dx.at(10, 14), 4.0f);
  EXPECT_FLOAT_EQ(f.dx.at(10, 10), 0.0f);
  EXPECT_FLOAT_EQ(f.dy.at(10, 14), 0.0f);
}

TEST(AnalyticFlow, StaticIsZero) {
  const BoundingBox b0{10, 8, 8, 8};
  const auto f = analytic_flow(pair(b0, b0), block_scene(b0), 0);
  EXPECT_EQ(f, zero_flow(48, 64));
  EXPECT_THROW(analytic_flow(pair(b0, b0), block_scene(b0), 1), Error);
}

TEST(AnalyticFlow, SequenceThreadIndependent) {
  InterpolatedTrajectory t = pair({10, 8, 8, 8}, {12, 9, 8, 8});
  t.frame_count = 6;
  t.tracks[0].boxes.clear();
  for (int k = 0; k < 6; ++k) t.tracks[0].boxes.push_back({10.0 + 2.5 * k, 8.0 + k, 8.0 + 0.5 * k, 8});
  const auto s = block_scene({10, 8, 8, 8});
  const auto a = analytic_flow_sequence(t, s, {}, 1);
  EXPECT_EQ(a.fields.size(), 5u);
  EXPECT_EQ(a, analytic_flow_sequence(t, s, {}, 3));
}

TEST(BlockMatch, RecoversTextureShift) {
  const auto a = textured(48, 64, 1);
  RgbImage b(48, 64, 0);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        const int sy = y - 1, sx = x - 3;
        b.at(y, x, ch) = (sy >= 0 && sx >= 0) ? a.at(sy, sx, ch) : 0;
      }
  const auto f = block_match_flow(a, b, 8, 4);
  // Interior blocks whose shifted copy is fully present.
  for (int y = 8; y < 40; ++y)
    for (int x = 8; x < 56; ++x) {
      EXPECT_EQ(f.dx.at(y, x), 3.0f);
      EXPECT_EQ(f.dy.at(y, x), 1.0f);
    }
}

TEST(BlockMatch, IdenticalOrUniformIsZero) {
  const auto a = textured(32, 32, 2);
  EXPECT_EQ(block_match_flow(a, a, 8, 3), zero_flow(32, 32));
  const RgbImage flat(32, 32, 9);
  EXPECT_EQ(block_match_flow(flat, flat, 8, 3), zero_flow(32, 32));
  EXPECT_THROW(block_match_flow(a, flat, 2, 3), Error);
}
