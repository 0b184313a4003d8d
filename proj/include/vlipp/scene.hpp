#pragma once

// Shared domain types: scenes, boxes, physical laws, and trajectory plans.
//
// Coordinates are image-space pixels with the origin at the top-left corner,
// x growing rightward and y growing downward. Boxes are real-valued; only the
// compositing and flow stages round them to pixels.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/raster.hpp"

namespace vlipp {

struct BoundingBox {
  double x = 0.0;  // top-left
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double center_x() const noexcept { return x + 0.5 * w; }
  double center_y() const noexcept { return y + 0.5 * h; }
  double area() const noexcept { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

// Integer pixel rectangle [left, left+width) x [top, top+height).
struct PixelRect {
  long left = 0;
  long top = 0;
  long width = 0;
  long height = 0;

  bool operator==(const PixelRect&) const = default;
};

// Rounds a real box to the pixel grid. Size is rounded independently of the
// position so that integer translations never change the footprint.
inline PixelRect rasterize(const BoundingBox& b) noexcept {
  return {round_half_away(b.x), round_half_away(b.y), std::max(1L, round_half_away(b.w)),
          std::max(1L, round_half_away(b.h))};
}

enum class PhysicsLaw {
  gravity,
  momentum_conservation,
  optics,
  thermodynamics,
  magnetism,
  fluid_mechanics,
};

inline constexpr std::array<PhysicsLaw, 6> all_laws = {
    PhysicsLaw::gravity,        PhysicsLaw::momentum_conservation, PhysicsLaw::optics,
    PhysicsLaw::thermodynamics, PhysicsLaw::magnetism,             PhysicsLaw::fluid_mechanics,
};

inline std::string_view to_token(PhysicsLaw law) noexcept {
  switch (law) {
    case PhysicsLaw::gravity: return "gravity";
    case PhysicsLaw::momentum_conservation: return "momentum_conservation";
    case PhysicsLaw::optics: return "optics";
    case PhysicsLaw::thermodynamics: return "thermodynamics";
    case PhysicsLaw::magnetism: return "magnetism";
    case PhysicsLaw::fluid_mechanics: return "fluid_mechanics";
  }
  return "gravity";
}

inline std::optional<PhysicsLaw> law_from_token(std::string_view token) noexcept {
  for (auto law : all_laws) {
    if (to_token(law) == token) return law;
  }
  return std::nullopt;
}

struct SceneObject {
  int id = 0;
  std::string label;
  BoundingBox init_box;
  Mask mask;  // same extent as the scene image, 1 = foreground
};

struct InputScene {
  RgbImage image;
  std::string description;
  std::vector<SceneObject> objects;

  int height() const noexcept { return image.height(); }
  int width() const noexcept { return image.width(); }

  const SceneObject* find(int id) const noexcept {
    for (const auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }
};

// Mask covering every pixel whose center lies inside `box`.
inline Mask box_mask(int height, int width, const BoundingBox& box) {
  Mask m(height, width, 0);
  const PixelRect r = rasterize(box);
  for (long row = std::max(0L, r.top); row < std::min<long>(height, r.top + r.height); ++row) {
    for (long col = std::max(0L, r.left); col < std::min<long>(width, r.left + r.width); ++col) {
      m.at(static_cast<int>(row), static_cast<int>(col)) = 1;
    }
  }
  return m;
}

struct Diagnostic {
  int object_id = -1;  // -1 for scene-level findings
  std::string field;
  std::string message;
};

inline constexpr int min_scene_extent = 16;
inline constexpr double mask_slack_px = 2.0;

inline std::vector<Diagnostic> validate_scene(const InputScene& scene) {
  std::vector<Diagnostic> out;
  const int H = scene.height();
  const int W = scene.width();
  if (H < min_scene_extent || W < min_scene_extent) {
    out.push_back({-1, "image", "image smaller than 16x16"});
  }

  std::set<int> ids;
  for (const auto& o : scene.objects) {
    const std::string who = "object " + std::to_string(o.id);
    if (!ids.insert(o.id).second) out.push_back({o.id, "id", "duplicate id, " + who});
    if (!(o.init_box.w > 0.0)) out.push_back({o.id, "init_box.w", "box width nonpositive, " + who});
    if (!(o.init_box.h > 0.0)) out.push_back({o.id, "init_box.h", "box height nonpositive, " + who});
    if (o.mask.height() != H || o.mask.width() != W) {
      out.push_back({o.id, "mask", "mask extent differs from image, " + who});
      continue;
    }
    const double x0 = o.init_box.x - mask_slack_px;
    const double y0 = o.init_box.y - mask_slack_px;
    const double x1 = o.init_box.x + o.init_box.w + mask_slack_px;
    const double y1 = o.init_box.y + o.init_box.h + mask_slack_px;
    bool escaped = false;
    for (int r = 0; r < H && !escaped; ++r) {
      for (int c = 0; c < W; ++c) {
        if (!o.mask.at(r, c)) continue;
        const double cx = c + 0.5;
        const double cy = r + 0.5;
        if (cx < x0 || cx > x1 || cy < y0 || cy > y1) {
          escaped = true;
          break;
        }
      }
    }
    if (escaped) out.push_back({o.id, "mask", "mask escapes box, " + who});
  }

  int expected = 0;
  for (int id : ids) {
    if (id != expected++) {
      out.push_back({id, "id", "object ids are not dense from 0"});
      break;
    }
  }
  return out;
}

enum class PlanSource { vlm, mock, file };

struct Provenance {
  PlanSource source = PlanSource::mock;
  std::string prompt_sha256;  // set when source == vlm

  bool operator==(const Provenance&) const = default;
};

struct Track {
  int object_id = 0;
  std::string label;
  std::vector<BoundingBox> boxes;

  bool operator==(const Track&) const = default;
};

inline constexpr int default_keyframe_count = 12;
inline constexpr int default_frame_count = 49;

struct TrajectoryPlan {
  PhysicsLaw law = PhysicsLaw::gravity;
  int width = 0;
  int height = 0;
  int keyframe_count = default_keyframe_count;
  std::vector<Track> tracks;
  Provenance provenance;

  const Track* find(int object_id) const noexcept {
    for (const auto& t : tracks) {
      if (t.object_id == object_id) return &t;
    }
    return nullptr;
  }

  bool operator==(const TrajectoryPlan&) const = default;
};

struct InterpolatedTrajectory {
  PhysicsLaw law = PhysicsLaw::gravity;
  int width = 0;
  int height = 0;
  int keyframe_count = default_keyframe_count;
  int frame_count = default_frame_count;
  std::vector<Track> tracks;

  const Track* find(int object_id) const noexcept {
    for (const auto& t : tracks) {
      if (t.object_id == object_id) return &t;
    }
    return nullptr;
  }

  bool operator==(const InterpolatedTrajectory&) const = default;
};

inline constexpr double init_box_tolerance_px = 0.5;

// Structural plan invariants. When `scene` is given, the first track's
// opening box is also checked against its object's initial box.
inline std::vector<Diagnostic> validate_plan(const TrajectoryPlan& plan,
                                             const InputScene* scene = nullptr) {
  std::vector<Diagnostic> out;
  if (plan.keyframe_count < 2) out.push_back({-1, "keyframe_count", "keyframe_count below 2"});
  for (const auto& t : plan.tracks) {
    const std::string who = "track " + std::to_string(t.object_id);
    if (static_cast<int>(t.boxes.size()) != plan.keyframe_count) {
      out.push_back({t.object_id, "boxes",
                     who + " has " + std::to_string(t.boxes.size()) + " boxes, expected " +
                         std::to_string(plan.keyframe_count)});
    }
    for (std::size_t k = 0; k < t.boxes.size(); ++k) {
      if (!(t.boxes[k].w > 0.0) || !(t.boxes[k].h > 0.0)) {
        out.push_back({t.object_id, "boxes", who + " has nonpositive size at keyframe " +
                                                 std::to_string(k)});
        break;
      }
    }
  }
  if (scene != nullptr && !plan.tracks.empty() && !plan.tracks.front().boxes.empty()) {
    const Track& first = plan.tracks.front();
    if (const SceneObject* obj = scene->find(first.object_id)) {
      const BoundingBox& a = first.boxes.front();
      const BoundingBox& b = obj->init_box;
      const double err = std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.w - b.w),
                                   std::abs(a.h - b.h)});
      if (err > init_box_tolerance_px) {
        out.push_back({first.object_id, "boxes[0]",
                       "track " + std::to_string(first.object_id) +
                           " keyframe 0 differs from the object's initial box"});
      }
    } else {
      out.push_back({first.object_id, "object_id", "track refers to an unknown object"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline std::string_view to_token(PlanSource s) noexcept {
  switch (s) {
    case PlanSource::vlm: return "vlm";
    case PlanSource::mock: return "mock";
    case PlanSource::file: return "file";
  }
  return "file";
}

namespace json_detail {

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw format_error(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw format_error(where + ": field \"" + key + "\" has the wrong type");
  }
}

inline const nlohmann::json& array_field(const nlohmann::json& j, const char* key,
                                         const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw format_error(where + ": missing \"" + key + "\"");
  const auto& a = j.at(key);
  if (!a.is_array()) throw format_error(where + ": field \"" + key + "\" is not an array");
  return a;
}

inline double number_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw format_error(where + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) throw format_error(where + ": field \"" + key + "\" is not a number");
  return v.get<double>();
}

inline nlohmann::json tracks_to_json(const std::vector<Track>& tracks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : tracks) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : t.boxes) boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    arr.push_back({{"object_id", t.object_id}, {"label", t.label}, {"boxes", std::move(boxes)}});
  }
  return arr;
}

inline std::vector<Track> tracks_from_json(const nlohmann::json& j) {
  std::vector<Track> tracks;
  const auto& arr = array_field(j, "tracks", "plan");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "tracks[" + std::to_string(i) + "]";
    Track t;
    t.object_id = field<int>(arr[i], "object_id", where);
    t.label = arr[i].contains("label") ? field<std::string>(arr[i], "label", where) : std::string{};
    const auto& boxes = array_field(arr[i], "boxes", where);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const std::string bw = where + ".boxes[" + std::to_string(k) + "]";
      t.boxes.push_back({number_field(boxes[k], "x", bw), number_field(boxes[k], "y", bw),
                         number_field(boxes[k], "w", bw), number_field(boxes[k], "h", bw)});
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

inline PhysicsLaw law_field(const nlohmann::json& j) {
  const auto token = field<std::string>(j, "law", "plan");
  auto law = law_from_token(token);
  if (!law) throw format_error("plan: unknown law \"" + token + "\"");
  return *law;
}

}  // namespace json_detail

inline nlohmann::json to_json(const TrajectoryPlan& plan) {
  nlohmann::json j;
  j["law"] = std::string(to_token(plan.law));
  j["width"] = plan.width;
  j["height"] = plan.height;
  j["keyframe_count"] = plan.keyframe_count;
  j["tracks"] = json_detail::tracks_to_json(plan.tracks);
  nlohmann::json prov{{"source", std::string(to_token(plan.provenance.source))}};
  if (!plan.provenance.prompt_sha256.empty()) prov["prompt_sha256"] = plan.provenance.prompt_sha256;
  j["provenance"] = std::move(prov);
  return j;
}

// Parses the plan schema. A missing "provenance" object marks the plan as
// file-sourced.
inline TrajectoryPlan plan_from_json(const nlohmann::json& j) {
  using namespace json_detail;
  if (!j.is_object()) throw format_error("plan: expected a JSON object");
  TrajectoryPlan p;
  p.law = law_field(j);
  p.width = field<int>(j, "width", "plan");
  p.height = field<int>(j, "height", "plan");
  p.keyframe_count = field<int>(j, "keyframe_count", "plan");
  p.tracks = tracks_from_json(j);
  p.provenance = {PlanSource::file, {}};
  if (j.contains("provenance") && j["provenance"].is_object()) {
    const auto src = field<std::string>(j["provenance"], "source", "provenance");
    if (src == "vlm") p.provenance.source = PlanSource::vlm;
    else if (src == "mock") p.provenance.source = PlanSource::mock;
    else if (src == "file") p.provenance.source = PlanSource::file;
    else throw format_error("provenance: unknown source \"" + src + "\"");
    if (j["provenance"].contains("prompt_sha256")) {
      p.provenance.prompt_sha256 = field<std::string>(j["provenance"], "prompt_sha256", "provenance");
    }
  }
  return p;
}

inline nlohmann::json to_json(const InterpolatedTrajectory& traj) {
  nlohmann::json j;
  j["law"] = std::string(to_token(traj.law));
  j["width"] = traj.width;
  j["height"] = traj.height;
  j["keyframe_count"] = traj.keyframe_count;
  j["frame_count"] = traj.frame_count;
  j["tracks"] = json_detail::tracks_to_json(traj.tracks);
  return j;
}

inline InterpolatedTrajectory trajectory_from_json(const nlohmann::json& j) {
  using namespace json_detail;
  if (!j.is_object()) throw format_error("trajectory: expected a JSON object");
  InterpolatedTrajectory t;
  t.law = law_field(j);
  t.width = field<int>(j, "width", "trajectory");
  t.height = field<int>(j, "height", "trajectory");
  t.keyframe_count = field<int>(j, "keyframe_count", "trajectory");
  t.frame_count = field<int>(j, "frame_count", "trajectory");
  t.tracks = tracks_from_json(j);
  for (const auto& tr : t.tracks) {
    if (static_cast<int>(tr.boxes.size()) != t.frame_count) {
      throw format_error("trajectory: track " + std::to_string(tr.object_id) +
                         " box count does not match frame_count");
    }
  }
  return t;
}

}  // namespace vlipp
