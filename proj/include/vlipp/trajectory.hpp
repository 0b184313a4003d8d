#pragma once

// Keyframe-to-frame expansion and per-track resampling helpers.

#include <utility>
#include <vector>

#include "vlipp/error.hpp"
#include "vlipp/scene.hpp"

namespace vlipp {

// Frame index of keyframe k: round(k * (frames - 1) / (keyframes - 1)), ties
// rounding up. Evaluated in integers so anchors are exact.
inline int anchor_index(int k, int keyframe_count, int frame_count) noexcept {
  const long num = 2L * k * (frame_count - 1) + (keyframe_count - 1);
  return static_cast<int>(num / (2L * (keyframe_count - 1)));
}

inline std::vector<int> anchor_indices(int keyframe_count, int frame_count) {
  std::vector<int> out(keyframe_count);
  for (int k = 0; k < keyframe_count; ++k) out[k] = anchor_index(k, keyframe_count, frame_count);
  return out;
}

namespace detail {

inline double lerp(double a, double b, double s) noexcept { return s == 0.0 ? a : a + (b - a) * s; }

inline BoundingBox lerp(const BoundingBox& a, const BoundingBox& b, double s) noexcept {
  return {lerp(a.x, b.x, s), lerp(a.y, b.y, s), lerp(a.w, b.w, s), lerp(a.h, b.h, s)};
}

}  // namespace detail

// Piecewise-linear expansion of each track in corner space (x, y, w, h
// independently). Anchor frames reproduce the keyframes bit-for-bit.
inline InterpolatedTrajectory interpolate(const TrajectoryPlan& plan, int frame_count) {
  const int K = plan.keyframe_count;
  if (K < 2) throw precondition_error("interpolate: keyframe_count must be at least 2");
  if (frame_count < K) {
    throw precondition_error("interpolate: frame_count " + std::to_string(frame_count) +
                             " is below keyframe_count " + std::to_string(K));
  }
  const auto anchors = anchor_indices(K, frame_count);

  InterpolatedTrajectory out;
  out.law = plan.law;
  out.width = plan.width;
  out.height = plan.height;
  out.keyframe_count = K;
  out.frame_count = frame_count;
  out.tracks.reserve(plan.tracks.size());
  for (const auto& track : plan.tracks) {
    if (static_cast<int>(track.boxes.size()) != K) {
      throw validation_error("interpolate: track " + std::to_string(track.object_id) +
                             " does not have keyframe_count boxes");
    }
    Track t{track.object_id, track.label, std::vector<BoundingBox>(frame_count)};
    for (int k = 0; k + 1 < K; ++k) {
      const int a = anchors[k];
      const int b = anchors[k + 1];
      for (int f = a; f < b; ++f) {
        const double s = static_cast<double>(f - a) / static_cast<double>(b - a);
        t.boxes[f] = detail::lerp(track.boxes[k], track.boxes[k + 1], s);
      }
    }
    t.boxes[frame_count - 1] = track.boxes[K - 1];
    out.tracks.push_back(std::move(t));
  }
  return out;
}

struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
};

// Box-center velocity in px/frame: central difference inside the sequence,
// one-sided at the first and last frame.
inline Velocity track_velocity(const InterpolatedTrajectory& traj, int object_id, int frame) {
  const Track* t = traj.find(object_id);
  if (t == nullptr) throw precondition_error("track_velocity: unknown object " + std::to_string(object_id));
  const int n = static_cast<int>(t->boxes.size());
  if (n < 2) throw precondition_error("track_velocity: track needs at least 2 frames");
  if (frame < 0 || frame >= n) throw precondition_error("track_velocity: frame out of range");
  const int lo = frame == 0 ? 0 : frame - 1;
  const int hi = frame == n - 1 ? n - 1 : frame + 1;
  const double span = hi - lo;
  const auto& a = t->boxes[lo];
  const auto& b = t->boxes[hi];
  return {(b.center_x() - a.center_x()) / span, (b.center_y() - a.center_y()) / span};
}

}  // namespace vlipp
