#pragma once

// Physics-aware chain-of-thought prompt construction for the VLM planner.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/image_io.hpp"
#include "vlipp/scene.hpp"

namespace vlipp::planner {

// Ablation switches. Context and CoT only make sense with the planner on.
struct PlannerMode {
  bool use_planner = true;
  bool use_context = true;
  bool use_cot = true;

  bool valid() const noexcept { return use_planner || (!use_context && !use_cot); }
  bool operator==(const PlannerMode&) const = default;
};

struct PromptBundle {
  std::string system_text;
  std::string law_context;             // empty when context is disabled
  std::vector<std::string> cot_steps;  // 3 staged steps, or 1 direct instruction
  std::string scene_summary;
  std::vector<std::uint8_t> image_payload;  // PNG-encoded first frame
  PhysicsLaw law = PhysicsLaw::gravity;
  int keyframe_count = default_keyframe_count;
};

// Background knowledge handed to the model for each law: what the law does
// and how it shows up in image-space bounding boxes.
inline std::string_view law_context_text(PhysicsLaw law) {
  switch (law) {
    case PhysicsLaw::gravity:
      return "Gravity pulls every unsupported object straight down with constant acceleration. "
             "In image space y grows downward, so a falling object's box moves down by a larger "
             "amount each frame while its horizontal speed stays constant. When an object hits the "
             "ground or a surface it stops or bounces; each bounce reaches a lower height than the "
             "previous one because energy is lost on impact. Box width and height stay fixed for "
             "rigid objects.";
    case PhysicsLaw::momentum_conservation:
      return "In a collision the total momentum of the colliding objects is conserved. Objects move "
             "in straight lines at constant speed until they touch. For equal masses in a head-on "
             "elastic collision the velocities are exchanged; a heavier object keeps moving forward "
             "after striking a lighter one, and a lighter object rebounds from a heavier one. Boxes of "
             "rigid objects keep their size; only their positions change.";
    case PhysicsLaw::optics:
      return "Optical phenomena (reflection, refraction, shadows, light sources switching on or off) "
             "change the appearance of a scene rather than the positions of objects. Objects usually "
             "stay in place; a shadow or light patch moves with its light source, and an object seen "
             "through glass or water appears shifted or scaled. Predict boxes that stay mostly fixed "
             "unless the description implies motion.";
    case PhysicsLaw::thermodynamics:
      return "Heat transfer changes the state of matter. A melting solid loses volume gradually: its "
             "box shrinks, mainly in height, while staying anchored to the surface it rests on. "
             "Evaporating or burning material shrinks and may disappear; expanding gas or rising "
             "dough grows. These changes are monotone and slow compared with rigid-body motion.";
    case PhysicsLaw::magnetism:
      return "A magnet attracts ferromagnetic objects and attracts or repels other magnets. The force "
             "grows rapidly as the distance shrinks, so an attracted object accelerates toward the "
             "magnet and stops on contact. Objects made of non-magnetic material are unaffected. Box "
             "sizes of rigid objects do not change.";
    case PhysicsLaw::fluid_mechanics:
      return "Liquids flow downward under gravity and take the shape of their container. When liquid "
             "is poured from one container into another, the level in the source drops while the level "
             "in the target rises, at matching rates. A liquid region's box changes height "
             "monotonically while its bottom edge stays on the container floor; falling streams are "
             "tall and narrow.";
  }
  return {};
}

inline std::string system_instructions(int keyframe_count) {
  return "You are a motion planner for physically plausible video generation. You receive the first "
         "frame of a video, a description of what happens, and the objects involved with their "
         "bounding boxes. Boxes are [x, y, w, h] in pixels, where (x, y) is the top-left corner, x grows "
         "to the right and y grows downward. Predict how every listed object's box moves and changes "
         "shape over the next " +
         std::to_string(keyframe_count) +
         " frames, keyframe 0 being the current frame. You may reason in prose first. End your answer "
         "with exactly one fenced ```json block holding an object with the keys \"law\", \"width\", "
         "\"height\", \"keyframe_count\" and \"tracks\"; each track has \"object_id\", \"label\" and "
         "\"boxes\", a list of exactly " +
         std::to_string(keyframe_count) +
         " objects with numeric \"x\", \"y\", \"w\", \"h\". Keyframe 0 must repeat the given box.";
}

inline std::vector<std::string> reasoning_steps(PhysicsLaw law, int keyframe_count) {
  const std::string law_name(to_token(law));
  return {
      "Step 1: Read the video description together with the physical law (" + law_name +
          ") and the physical context. Explain in detail how this law governs the event described.",
      "Step 2: Analyze every listed object: how it can interact with the other objects and the "
      "scene, in which direction it moves, how fast, and whether it changes shape.",
      "Step 3: Predict the detailed change in position and shape of each object's bounding box over "
      "the " +
          std::to_string(keyframe_count) + " keyframes and write them into the JSON block.",
  };
}

inline std::string direct_instruction(int keyframe_count) {
  return "Predict the bounding box of each object at each of the " + std::to_string(keyframe_count) +
         " keyframes and write them into the JSON block.";
}

namespace prompt_detail {

inline std::string number(double v) { return nlohmann::json(v).dump(); }

}  // namespace prompt_detail

inline std::string summarize_scene(const InputScene& scene) {
  using prompt_detail::number;
  std::string s = "Description: " + scene.description + "\n";
  s += "Image size: " + std::to_string(scene.width()) + " x " + std::to_string(scene.height()) + " px\n";
  s += "Objects:";
  for (const auto& o : scene.objects) {
    s += "\n- object_id " + std::to_string(o.id) + " \"" + o.label + "\": [" + number(o.init_box.x) + ", " +
         number(o.init_box.y) + ", " + number(o.init_box.w) + ", " + number(o.init_box.h) + "]";
  }
  return s;
}

inline PromptBundle build_prompt(const InputScene& scene, PhysicsLaw law, PlannerMode mode, int keyframe_count) {
  if (!mode.use_planner) throw precondition_error("build_prompt: planner is disabled in this mode");
  if (!mode.valid()) throw precondition_error("build_prompt: inconsistent planner mode");
  if (keyframe_count < 2) throw precondition_error("build_prompt: keyframe_count must be at least 2");

  PromptBundle b;
  b.law = law;
  b.keyframe_count = keyframe_count;
  b.system_text = system_instructions(keyframe_count);
  if (mode.use_context) b.law_context = std::string(law_context_text(law));
  if (mode.use_cot) {
    b.cot_steps = reasoning_steps(law, keyframe_count);
  } else {
    b.cot_steps = {direct_instruction(keyframe_count)};
  }
  b.scene_summary = summarize_scene(scene);
  b.image_payload = encode_png(scene.image);
  return b;
}

inline std::string context_block(const PromptBundle& b) {
  if (b.law_context.empty()) return {};
  return "[Physical context]\n" + b.law_context + "\n\n";
}

// User-turn text: optional context block, law, scene summary, instructions.
inline std::string user_text(const PromptBundle& b) {
  std::string s = context_block(b);
  s += "[Physical law]\n" + std::string(to_token(b.law)) + "\n\n";
  s += "[Scene]\n" + b.scene_summary + "\n\n";
  s += "[Instructions]";
  for (const auto& step : b.cot_steps) s += "\n" + step;
  return s;
}

// Everything the model sees as text, in a stable order; used for cache keys.
inline std::string serialize_prompt(const PromptBundle& b) { return b.system_text + "\n\n" + user_text(b); }

// Law classification is text-only: the description alone decides the law.
inline std::string classify_system_text() {
  std::string s =
      "You classify the physical phenomenon in a short video description. Answer with exactly one "
      "token from this list and nothing else:";
  for (auto law : all_laws) s += " " + std::string(to_token(law));
  return s + ".";
}

}  // namespace vlipp::planner
