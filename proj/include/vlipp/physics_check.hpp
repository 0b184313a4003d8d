#pragma once

// Plausibility checks that score a box trajectory against the law it claims
// to follow. Checks never mutate their input and return a report instead of
// throwing, except when the input cannot be checked at all.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/scene.hpp"
#include "vlipp/trajectory.hpp"

namespace vlipp {

enum class CheckStatus { pass, warn, fail };

inline const char* to_token(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
  }
  return "fail";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double score = 1.0;  // [0, 1]; 1.0 means exact analytic agreement
  std::string message;
};

struct ValidationReport {
  PhysicsLaw law = PhysicsLaw::gravity;
  std::vector<CheckResult> checks;

  CheckStatus overall() const noexcept {
    CheckStatus worst = CheckStatus::pass;
    for (const auto& c : checks) {
      if (c.status == CheckStatus::fail) return CheckStatus::fail;
      if (c.status == CheckStatus::warn) worst = CheckStatus::warn;
    }
    return worst;
  }

  const CheckResult* find(const std::string& name) const noexcept {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  void merge(const ValidationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

inline nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"status", to_token(c.status)}, {"score", c.score},
                      {"message", c.message}});
  }
  return {{"law", std::string(to_token(r.law))}, {"overall", to_token(r.overall())},
          {"checks", std::move(checks)}};
}

namespace check_detail {

// Values below this are treated as floating-point residue of exact arithmetic.
inline constexpr double exact_eps = 1e-9;

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
};

inline Stats sample_stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return s;
  double acc = 0.0;
  for (double x : v) acc += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(acc / static_cast<double>(v.size() - 1));
  return s;
}

// Relative spread, with exact-arithmetic residue snapped to zero.
inline double coefficient_of_variation(const Stats& s) {
  if (s.stddev <= exact_eps * std::max(1.0, std::abs(s.mean))) return 0.0;
  return s.stddev / std::abs(s.mean);
}

inline double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

inline void require_law(PhysicsLaw actual, PhysicsLaw expected, const char* who) {
  if (actual != expected) {
    throw precondition_error(std::string(who) + ": trajectory law is " + std::string(to_token(actual)) +
                             ", expected " + std::string(to_token(expected)));
  }
}

// Keyframe boxes of every track. Interpolated trajectories are sampled back
// at their anchor frames, which reproduce the keyframes exactly.
inline std::vector<Track> keyframe_tracks(const TrajectoryPlan& plan) { return plan.tracks; }

inline std::vector<Track> keyframe_tracks(const InterpolatedTrajectory& traj) {
  const auto anchors = anchor_indices(traj.keyframe_count, traj.frame_count);
  std::vector<Track> out;
  for (const auto& t : traj.tracks) {
    Track k{t.object_id, t.label, {}};
    for (int a : anchors) k.boxes.push_back(t.boxes.at(a));
    out.push_back(std::move(k));
  }
  return out;
}

inline BoundingBox swept(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.x + a.w, b.x + b.w);
  const double y1 = std::max(a.y + a.h, b.y + b.h);
  return {x0, y0, x1 - x0, y1 - y0};
}

// Closed-interval overlap; touching boxes count as contact.
inline bool touches(const BoundingBox& a, const BoundingBox& b) noexcept {
  return a.x <= b.x + b.w && b.x <= a.x + a.w && a.y <= b.y + b.h && b.y <= a.y + a.h;
}

}  // namespace check_detail

// Gravity: along each track's pre-bounce segment the second differences of
// the box-center y must be positive (downward in image space) and nearly
// constant, and the horizontal motion nearly uniform.
//
// The bounce frame is the first frame where the vertical motion turns from
// downward to upward or resting; it and everything after it are excluded.
// Interpolated input is evaluated on its keyframes.
template <typename Trajectory>
ValidationReport check_gravity(const Trajectory& traj, double tol) {
  using namespace check_detail;
  require_law(traj.law, PhysicsLaw::gravity, "check_gravity");
  ValidationReport report{traj.law, {}};
  for (const auto& track : keyframe_tracks(traj)) {
    const int n = static_cast<int>(track.boxes.size());
    if (n < 4) {
      throw precondition_error("check_gravity: track " + std::to_string(track.object_id) +
                               " has fewer than 4 frames");
    }
    const std::string prefix = "gravity.track" + std::to_string(track.object_id);
    std::vector<double> ys(n), xs(n);
    for (int k = 0; k < n; ++k) {
      ys[k] = track.boxes[k].center_y();
      xs[k] = track.boxes[k].center_x();
    }

    bool moving = false;
    for (int k = 0; k + 1 < n; ++k) {
      if (std::abs(ys[k + 1] - ys[k]) > exact_eps || std::abs(xs[k + 1] - xs[k]) > exact_eps) {
        moving = true;
      }
    }
    if (!moving) {
      report.checks.push_back({prefix + ".acceleration", CheckStatus::warn, 1.0, "static object"});
      continue;
    }

    int segment_end = n;  // exclusive
    for (int k = 1; k + 1 < n; ++k) {
      const double before = ys[k] - ys[k - 1];
      const double after = ys[k + 1] - ys[k];
      if (before > exact_eps && after <= exact_eps) {
        segment_end = k;
        break;
      }
    }

    std::vector<double> d2;
    for (int k = 1; k + 1 < segment_end; ++k) d2.push_back(ys[k + 1] - 2.0 * ys[k] + ys[k - 1]);

    if (d2.empty()) {
      report.checks.push_back({prefix + ".acceleration", CheckStatus::warn, 0.0,
                               "pre-bounce segment too short to estimate acceleration"});
    } else if (std::all_of(d2.begin(), d2.end(), [](double v) { return std::abs(v) <= exact_eps; })) {
      report.checks.push_back({prefix + ".acceleration", CheckStatus::fail, 0.0, "no acceleration"});
    } else if (std::any_of(d2.begin(), d2.end(), [](double v) { return v <= exact_eps; })) {
      report.checks.push_back({prefix + ".acceleration", CheckStatus::fail, 0.0,
                               "vertical acceleration is not consistently downward"});
    } else {
      const Stats s = sample_stats(d2);
      const double cv = coefficient_of_variation(s);
      const bool ok = cv <= tol;
      report.checks.push_back({prefix + ".acceleration", ok ? CheckStatus::pass : CheckStatus::fail,
                               clamp01(1.0 - cv),
                               "mean second difference " + std::to_string(s.mean) + " px/frame^2, relative spread " +
                                   std::to_string(cv)});
    }

    std::vector<double> dx;
    for (int k = 0; k + 1 < segment_end; ++k) dx.push_back(std::abs(xs[k + 1] - xs[k]));
    const Stats sx = sample_stats(dx);
    if (dx.empty() || std::all_of(dx.begin(), dx.end(), [](double v) { return v <= exact_eps; })) {
      report.checks.push_back({prefix + ".horizontal_drift", CheckStatus::pass, 1.0, "no horizontal drift"});
    } else {
      const double cv = coefficient_of_variation(sx);
      const bool ok = cv <= tol;
      report.checks.push_back({prefix + ".horizontal_drift", ok ? CheckStatus::pass : CheckStatus::fail,
                               clamp01(1.0 - cv),
                               "horizontal speed relative spread " + std::to_string(cv)});
    }
  }
  return report;
}

struct MomentumResult {
  std::optional<int> contact_frame;  // first frame of the contact pair (f, f + 1)
  int first_id = -1;
  int second_id = -1;
  double error_x = 0.0;
  double error_y = 0.0;
};

// Momentum: the first pair of tracks whose swept boxes touch between frames
// (f, f+1) is taken as the collision. Velocities average over the 3 frame
// steps ending at f and the 3 starting at f+1; total momentum must agree
// per component within tol x sum(m |v_before|).
template <typename Trajectory>
ValidationReport check_momentum(const Trajectory& traj, const std::map<int, double>& masses, double tol,
                                MomentumResult* detail = nullptr) {
  using namespace check_detail;
  require_law(traj.law, PhysicsLaw::momentum_conservation, "check_momentum");
  ValidationReport report{traj.law, {}};
  auto mass_of = [&](int id) {
    auto it = masses.find(id);
    const double m = it == masses.end() ? 1.0 : it->second;
    if (!(m > 0.0)) throw precondition_error("check_momentum: mass of object " + std::to_string(id) + " must be positive");
    return m;
  };

  const auto& tracks = traj.tracks;
  std::size_t n = tracks.empty() ? 0 : tracks.front().boxes.size();
  for (const auto& t : tracks) n = std::min(n, t.boxes.size());

  std::optional<int> contact;
  std::size_t ia = 0, ib = 0;
  for (std::size_t f = 0; f + 1 < n && !contact; ++f) {
    for (std::size_t i = 0; i < tracks.size() && !contact; ++i) {
      for (std::size_t j = i + 1; j < tracks.size() && !contact; ++j) {
        if (touches(swept(tracks[i].boxes[f], tracks[i].boxes[f + 1]),
                    swept(tracks[j].boxes[f], tracks[j].boxes[f + 1]))) {
          contact = static_cast<int>(f);
          ia = i;
          ib = j;
        }
      }
    }
  }
  if (!contact) {
    report.checks.push_back({"momentum", CheckStatus::warn, 0.0, "no collision detected"});
    if (detail) *detail = {};
    return report;
  }

  const int f = *contact;
  const int last = static_cast<int>(n) - 1;
  const int b0 = std::max(0, f - 3);
  const int a1 = std::min(last, f + 4);
  const std::string name = "momentum.pair" + std::to_string(tracks[ia].object_id) + "_" +
                           std::to_string(tracks[ib].object_id);
  if (b0 == f || a1 == f + 1) {
    report.checks.push_back({name, CheckStatus::warn, 0.0,
                             "collision at frame " + std::to_string(f) + " too close to the sequence ends"});
    if (detail) *detail = {contact, tracks[ia].object_id, tracks[ib].object_id, 0.0, 0.0};
    return report;
  }

  double p_before[2] = {0, 0}, p_after[2] = {0, 0}, scale[2] = {0, 0};
  for (std::size_t idx : {ia, ib}) {
    const auto& bx = tracks[idx].boxes;
    const double m = mass_of(tracks[idx].object_id);
    const double vbx = (bx[f].center_x() - bx[b0].center_x()) / (f - b0);
    const double vby = (bx[f].center_y() - bx[b0].center_y()) / (f - b0);
    const double vax = (bx[a1].center_x() - bx[f + 1].center_x()) / (a1 - f - 1);
    const double vay = (bx[a1].center_y() - bx[f + 1].center_y()) / (a1 - f - 1);
    p_before[0] += m * vbx;
    p_before[1] += m * vby;
    p_after[0] += m * vax;
    p_after[1] += m * vay;
    scale[0] += m * std::abs(vbx);
    scale[1] += m * std::abs(vby);
  }

  const double err[2] = {std::abs(p_before[0] - p_after[0]), std::abs(p_before[1] - p_after[1])};
  bool ok = true;
  double worst = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double e = err[c] <= exact_eps * std::max(1.0, scale[c]) ? 0.0 : err[c];
    if (scale[c] > 0.0) {
      ok = ok && e <= tol * scale[c];
      worst = std::max(worst, e / scale[c]);
    } else if (e > 0.0) {
      ok = false;
      worst = 1.0;
    }
  }
  if (detail) *detail = {contact, tracks[ia].object_id, tracks[ib].object_id, err[0], err[1]};
  report.checks.push_back({name, ok ? CheckStatus::pass : CheckStatus::fail, clamp01(1.0 - worst),
                           "contact at frame " + std::to_string(f) + ", momentum error (" +
                               std::to_string(err[0]) + ", " + std::to_string(err[1]) + ")"});
  return report;
}

struct ShapeHints {
  bool melting = false;  // the object is expected to shrink (thermodynamics)
};

// Heuristic checks: never fail, only warn.
template <typename Trajectory>
ValidationReport check_containment_and_shape(const Trajectory& traj, int width, int height, PhysicsLaw law,
                                             ShapeHints hints = {}) {
  using check_detail::exact_eps;
  ValidationReport report{law, {}};

  std::vector<std::string> escapes;
  for (const auto& t : traj.tracks) {
    for (std::size_t k = 0; k < t.boxes.size(); ++k) {
      const auto& b = t.boxes[k];
      if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > width || b.y + b.h > height) {
        escapes.push_back("out of bounds, frame " + std::to_string(k) + " (object " +
                          std::to_string(t.object_id) + ")");
        break;
      }
    }
  }
  if (escapes.empty()) {
    report.checks.push_back({"containment", CheckStatus::pass, 1.0, "all boxes inside the image"});
  } else {
    std::string msg;
    for (const auto& e : escapes) msg += (msg.empty() ? "" : "; ") + e;
    report.checks.push_back({"containment", CheckStatus::warn, 0.5, msg});
  }

  auto monotone = [](const std::vector<double>& v, int sign) {
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      if (sign * (v[k + 1] - v[k]) < -exact_eps) return false;
    }
    return true;
  };
  auto varies = [](const std::vector<double>& v) {
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      if (std::abs(v[k + 1] - v[k]) > exact_eps) return true;
    }
    return false;
  };

  if (law == PhysicsLaw::thermodynamics && hints.melting) {
    std::string bad;
    for (const auto& t : traj.tracks) {
      std::vector<double> area;
      for (const auto& b : t.boxes) area.push_back(b.area());
      if (!monotone(area, -1)) bad += (bad.empty() ? "" : ", ") + std::to_string(t.object_id);
    }
    if (bad.empty()) {
      report.checks.push_back({"shape.melting", CheckStatus::pass, 1.0, "box areas nonincreasing"});
    } else {
      report.checks.push_back({"shape.melting", CheckStatus::warn, 0.5, "box area grows for object(s) " + bad});
    }
  }

  if (law == PhysicsLaw::fluid_mechanics) {
    bool any = false;
    for (const auto& t : traj.tracks) {
      std::vector<double> area, cx, cy;
      for (const auto& b : t.boxes) {
        area.push_back(b.area());
        cx.push_back(b.center_x());
        cy.push_back(b.center_y());
      }
      for (const auto* v : {&area, &cx, &cy}) {
        if (varies(*v) && (monotone(*v, 1) || monotone(*v, -1))) any = true;
      }
    }
    report.checks.push_back({"shape.fluid", any ? CheckStatus::pass : CheckStatus::warn, any ? 1.0 : 0.5,
                             any ? "monotone level or position change present"
                                 : "no track changes area or position monotonically"});
  }
  return report;
}

}  // namespace vlipp
