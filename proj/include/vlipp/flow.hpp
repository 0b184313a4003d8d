#pragma once

// Dense forward optical flow of the synthetic video. The analytic route reads
// the displacement straight off the known box transforms; block matching is
// an independent estimator used to cross-check it.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "vlipp/animator.hpp"
#include "vlipp/error.hpp"
#include "vlipp/parallel.hpp"
#include "vlipp/raster.hpp"
#include "vlipp/scene.hpp"

namespace vlipp {

// Pixel p of frame t appears at p + (dx, dy) in frame t + 1.
struct FlowField {
  Plane dx;
  Plane dy;

  int height() const noexcept { return dx.height(); }
  int width() const noexcept { return dx.width(); }
  bool operator==(const FlowField&) const = default;
};

inline FlowField zero_flow(int height, int width) { return {Plane(height, width, 0.0f), Plane(height, width, 0.0f)}; }

struct FlowSequence {
  int height = 0;
  int width = 0;
  std::vector<FlowField> fields;  // frame_count - 1 entries

  bool operator==(const FlowSequence&) const = default;
};

// Affine map taking box b_t onto b_{t+1}, pivoting on the top-left corner,
// evaluated on every pixel the object covers at frame t. Later-drawn objects
// overwrite earlier ones.
inline FlowField analytic_flow(const InterpolatedTrajectory& traj, const InputScene& scene, int t,
                               const std::vector<int>& order = {}) {
  if (t < 0 || t + 1 >= traj.frame_count) throw precondition_error("analytic_flow: frame index out of range");
  const int H = scene.height();
  const int W = scene.width();
  FlowField f = zero_flow(H, W);
  for (const SceneObject* obj : draw_order(scene, order)) {
    const Sprite sprite = extract_sprite(scene, *obj);
    const BoundingBox b0 = box_at(traj, *obj, t);
    const BoundingBox b1 = box_at(traj, *obj, t + 1);
    const PixelRect r = rasterize(b0);
    if (r.left >= W || r.top >= H || r.left + r.width <= 0 || r.top + r.height <= 0) continue;
    const auto alpha = resize_bilinear(sprite.alpha, static_cast<int>(r.height), static_cast<int>(r.width));
    const double sw = b1.w / b0.w;
    const double sh = b1.h / b0.h;
    for (int y = 0; y < r.height; ++y) {
      const long py = r.top + y;
      if (py < 0 || py >= H) continue;
      for (int x = 0; x < r.width; ++x) {
        const long px = r.left + x;
        if (px < 0 || px >= W || alpha.at(y, x) < 0.5) continue;
        const double dx = (b1.x - b0.x) + (sw - 1.0) * (static_cast<double>(px) - b0.x);
        const double dy = (b1.y - b0.y) + (sh - 1.0) * (static_cast<double>(py) - b0.y);
        f.dx.at(static_cast<int>(py), static_cast<int>(px)) = static_cast<float>(dx);
        f.dy.at(static_cast<int>(py), static_cast<int>(px)) = static_cast<float>(dy);
      }
    }
  }
  return f;
}

inline FlowSequence analytic_flow_sequence(const InterpolatedTrajectory& traj, const InputScene& scene,
                                           const std::vector<int>& order = {}, int threads = 1) {
  FlowSequence seq{scene.height(), scene.width(), {}};
  const int n = std::max(0, traj.frame_count - 1);
  seq.fields.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int t) { seq.fields[t] = analytic_flow(traj, scene, t, order); });
  return seq;
}

// Exhaustive integer block matching (sum of squared differences over RGB).
// Blocks tile frame_a from the origin; candidates must lie fully inside
// frame_b. Ties prefer the smallest |dx|+|dy|, then the smallest dx, then dy.
inline FlowField block_match_flow(const RgbImage& a, const RgbImage& b, int block, int radius) {
  if (a.height() != b.height() || a.width() != b.width()) throw precondition_error("block_match_flow: frame sizes differ");
  if (block < 4) throw precondition_error("block_match_flow: block must be at least 4");
  const int H = a.height();
  const int W = a.width();
  FlowField f = zero_flow(H, W);
  for (int by = 0; by < H; by += block) {
    const int bh = std::min(block, H - by);
    for (int bx = 0; bx < W; bx += block) {
      const int bw = std::min(block, W - bx);
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      int best_dx = 0, best_dy = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        if (by + dy < 0 || by + dy + bh > H) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          if (bx + dx < 0 || bx + dx + bw > W) continue;
          std::int64_t ssd = 0;
          for (int y = 0; y < bh && ssd <= best; ++y) {
            for (int x = 0; x < bw; ++x) {
              for (int ch = 0; ch < 3; ++ch) {
                const int d = int{a.at(by + y, bx + x, ch)} - int{b.at(by + dy + y, bx + dx + x, ch)};
                ssd += d * d;
              }
            }
          }
          const auto better = [&] {
            if (ssd != best) return ssd < best;
            const int cost = std::abs(dx) + std::abs(dy);
            const int best_cost = std::abs(best_dx) + std::abs(best_dy);
            if (cost != best_cost) return cost < best_cost;
            if (dx != best_dx) return dx < best_dx;
            return dy < best_dy;
          };
          if (better()) {
            best = ssd;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      for (int y = 0; y < bh; ++y) {
        for (int x = 0; x < bw; ++x) {
          f.dx.at(by + y, bx + x) = static_cast<float>(best_dx);
          f.dy.at(by + y, bx + x) = static_cast<float>(best_dy);
        }
      }
    }
  }
  return f;
}

}  // namespace vlipp
