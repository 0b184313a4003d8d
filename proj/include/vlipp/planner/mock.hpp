#pragma once

// Deterministic stand-in for the VLM: closed-form trajectories that obey the
// law they are labelled with. Time is measured in keyframe indices.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "vlipp/error.hpp"
#include "vlipp/scene.hpp"

namespace vlipp::planner {

struct GravityParams {
  double g = 2.0;                    // px / keyframe^2, downward
  double vy = 0.0;                   // initial vertical velocity, px / keyframe
  double vx = 0.0;                   // constant horizontal velocity
  double restitution = 0.5;          // e in [0, 1]
  std::optional<double> floor_y;     // box bottom limit; defaults to image height
};

struct CollisionParams {
  std::map<int, double> velocity;  // horizontal velocity per object id, default 0
  std::map<int, double> mass;      // default 1
};

struct ConstantVelocityParams {
  double vx = 0.0;
  double vy = 0.0;
};

struct MockParams {
  GravityParams gravity;
  CollisionParams collision;
  ConstantVelocityParams constant;
  bool allow_fallback = true;  // other laws fall back to constant velocity
};

// Post-collision velocities of a 1D elastic collision.
struct ElasticOutcome {
  double v1 = 0.0;
  double v2 = 0.0;
};

inline ElasticOutcome elastic_collision(double m1, double v1, double m2, double v2) noexcept {
  const double total = m1 + m2;
  return {((m1 - m2) * v1 + 2.0 * m2 * v2) / total, ((m2 - m1) * v2 + 2.0 * m1 * v1) / total};
}

namespace mock_detail {

inline BoundingBox with_center(const BoundingBox& b, double cx, double cy) noexcept {
  return {cx - 0.5 * b.w, cy - 0.5 * b.h, b.w, b.h};
}

// Free fall from the initial box, clamped at the floor line. The keyframe at
// which the free-fall path first reaches the floor is placed on the floor and
// reflects the vertical velocity once, scaled by the restitution; the second
// landing leaves the object resting on the floor.
inline std::vector<BoundingBox> gravity_track(const BoundingBox& init, const GravityParams& p, double floor_y,
                                              int keyframes) {
  const double cy0 = init.center_y();
  const double cx0 = init.center_x();
  const double rest_cy = floor_y - 0.5 * init.h;
  std::vector<BoundingBox> out;
  out.reserve(keyframes);

  enum class Phase { falling, rebound, resting } phase = cy0 >= rest_cy ? Phase::resting : Phase::falling;
  int bounce_k = 0;
  double rebound_v = 0.0;
  for (int k = 0; k < keyframes; ++k) {
    double cy = rest_cy;
    if (phase == Phase::falling) {
      cy = cy0 + p.vy * k + 0.5 * p.g * k * k;
      if (cy >= rest_cy) {
        cy = rest_cy;
        bounce_k = k;
        rebound_v = -p.restitution * (p.vy + p.g * k);
        phase = Phase::rebound;
      }
    } else if (phase == Phase::rebound) {
      const double s = k - bounce_k;
      cy = rest_cy + rebound_v * s + 0.5 * p.g * s * s;
      if (cy >= rest_cy) {
        cy = rest_cy;
        phase = Phase::resting;
      }
    }
    out.push_back(with_center(init, cx0 + p.vx * k, cy));
  }
  return out;
}

}  // namespace mock_detail

inline TrajectoryPlan mock_plan(const InputScene& scene, PhysicsLaw law, const MockParams& params,
                                int keyframe_count) {
  if (keyframe_count < 2) throw precondition_error("mock_plan: keyframe_count must be at least 2");
  TrajectoryPlan plan;
  plan.law = law;
  plan.width = scene.width();
  plan.height = scene.height();
  plan.keyframe_count = keyframe_count;
  plan.provenance = {PlanSource::mock, {}};

  auto constant_velocity = [&](double vx, double vy) {
    for (const auto& o : scene.objects) {
      Track t{o.id, o.label, {}};
      for (int k = 0; k < keyframe_count; ++k) {
        t.boxes.push_back({o.init_box.x + vx * k, o.init_box.y + vy * k, o.init_box.w, o.init_box.h});
      }
      plan.tracks.push_back(std::move(t));
    }
  };

  switch (law) {
    case PhysicsLaw::gravity: {
      const auto& g = params.gravity;
      if (!(g.g > 0.0)) throw precondition_error("mock_plan: gravity g must be positive");
      if (g.restitution < 0.0 || g.restitution > 1.0) {
        throw precondition_error("mock_plan: restitution must lie in [0, 1]");
      }
      const double floor_y = g.floor_y.value_or(static_cast<double>(scene.height()));
      for (const auto& o : scene.objects) {
        plan.tracks.push_back({o.id, o.label, mock_detail::gravity_track(o.init_box, g, floor_y, keyframe_count)});
      }
      break;
    }
    case PhysicsLaw::momentum_conservation: {
      if (scene.objects.size() < 2) {
        throw precondition_error("mock_plan: a collision needs at least two objects");
      }
      const auto& c = params.collision;
      auto get = [](const std::map<int, double>& m, int id, double fallback) {
        auto it = m.find(id);
        return it == m.end() ? fallback : it->second;
      };
      const SceneObject& a = scene.objects[0];
      const SceneObject& b = scene.objects[1];
      const double va = get(c.velocity, a.id, 0.0);
      const double vb = get(c.velocity, b.id, 0.0);
      const double ma = get(c.mass, a.id, 1.0);
      const double mb = get(c.mass, b.id, 1.0);
      if (!(ma > 0.0) || !(mb > 0.0)) throw precondition_error("mock_plan: masses must be positive");

      // Gap between facing edges and the closing speed along x.
      const bool a_left = a.init_box.center_x() <= b.init_box.center_x();
      const double gap = a_left ? b.init_box.x - (a.init_box.x + a.init_box.w)
                                : a.init_box.x - (b.init_box.x + b.init_box.w);
      const double closing = a_left ? va - vb : vb - va;
      std::optional<double> t_contact;
      if (closing > 0.0) t_contact = std::max(0.0, gap) / closing;
      const ElasticOutcome after = elastic_collision(ma, va, mb, vb);

      auto position = [&](double x0, double v, double v_after, double t) {
        if (!t_contact || t <= *t_contact) return x0 + v * t;
        return x0 + v * *t_contact + v_after * (t - *t_contact);
      };
      Track ta{a.id, a.label, {}};
      Track tb{b.id, b.label, {}};
      for (int k = 0; k < keyframe_count; ++k) {
        ta.boxes.push_back({position(a.init_box.x, va, after.v1, k), a.init_box.y, a.init_box.w, a.init_box.h});
        tb.boxes.push_back({position(b.init_box.x, vb, after.v2, k), b.init_box.y, b.init_box.w, b.init_box.h});
      }
      plan.tracks.push_back(std::move(ta));
      plan.tracks.push_back(std::move(tb));
      for (std::size_t i = 2; i < scene.objects.size(); ++i) {
        const auto& o = scene.objects[i];
        plan.tracks.push_back({o.id, o.label, std::vector<BoundingBox>(keyframe_count, o.init_box)});
      }
      break;
    }
    default:
      if (!params.allow_fallback) {
        throw precondition_error("mock_plan: no analytic model for law " + std::string(to_token(law)));
      }
      constant_velocity(params.constant.vx, params.constant.vy);
      break;
  }
  return plan;
}

// Constant-velocity plan regardless of law; used for the zero-motion and
// uniform-translation scenarios.
inline TrajectoryPlan constant_velocity_plan(const InputScene& scene, PhysicsLaw law, double vx, double vy,
                                             int keyframe_count) {
  MockParams p;
  p.constant = {vx, vy};
  p.allow_fallback = true;
  TrajectoryPlan plan = mock_plan(scene, PhysicsLaw::optics, p, keyframe_count);
  plan.law = law;
  return plan;
}

}  // namespace vlipp::planner
