#pragma once

// Pipeline configuration and its key = value file format.
//
//   # comment
//   frame_count = 49
//   [vlm]
//   model = "gpt-4o"        -> key "vlm.model"
//
// Section headers prefix the keys that follow them. Values may be quoted.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/noise.hpp"
#include "vlipp/planner/mock.hpp"
#include "vlipp/planner/prompt.hpp"
#include "vlipp/planner/vlm.hpp"
#include "vlipp/scene.hpp"

namespace vlipp {

enum class Ablation { none, no_planner, no_context, no_cot, no_cc };

inline const char* to_token(Ablation a) noexcept {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::no_planner: return "no-planner";
    case Ablation::no_context: return "no-context";
    case Ablation::no_cot: return "no-cot";
    case Ablation::no_cc: return "no-cc";
  }
  return "none";
}

inline Ablation ablation_from_token(const std::string& s) {
  for (auto a : {Ablation::none, Ablation::no_planner, Ablation::no_context, Ablation::no_cot, Ablation::no_cc}) {
    if (s == to_token(a)) return a;
  }
  throw precondition_error("unknown ablation \"" + s + "\" (none, no-planner, no-context, no-cot, no-cc)");
}

inline planner::PlannerMode mode_for(Ablation a) noexcept {
  switch (a) {
    case Ablation::none: return {true, true, true};
    case Ablation::no_planner: return {false, false, false};
    case Ablation::no_context: return {true, false, true};
    case Ablation::no_cot: return {true, true, false};
    case Ablation::no_cc: return {true, false, false};
  }
  return {};
}

struct PipelineConfig {
  int frame_count = default_frame_count;
  int width = 720;
  int height = 480;
  int keyframe_count = default_keyframe_count;
  Ablation ablation = Ablation::none;
  InjectionSchedule schedule;
  std::uint64_t seed = 42;
  std::uint64_t seed2 = 7;
  planner::VlmConfig vlm;
  bool strict = false;
  std::map<int, double> masses;
  int threads = 1;

  bool mock = false;
  bool mock_constant = false;       // mock ignores the law and moves at constant velocity
  std::optional<PhysicsLaw> law;  // skip classification when set
  planner::MockParams mock_params = default_mock_params();
  double gravity_tolerance = 0.15;
  double momentum_tolerance = 0.05;
  bool melting = false;
  std::vector<int> draw_order;

  planner::PlannerMode mode() const noexcept { return mode_for(ablation); }

  static planner::MockParams default_mock_params() {
    planner::MockParams p;
    p.gravity.g = 8.0;
    p.gravity.restitution = 0.5;
    return p;
  }
};

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw format_error("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw format_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string::npos) throw format_error("config line " + std::to_string(lineno) + ": unterminated string");
      value = value.substr(1, close - 1);
    } else if (const auto hash = value.find('#'); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw format_error("config line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace config_detail {

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw format_error("config: " + key + " expects a number, got \"" + v + "\"");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw format_error("config: " + key + " expects an integer, got \"" + v + "\"");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long d = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw format_error("config: " + key + " expects an unsigned integer, got \"" + v + "\"");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw format_error("config: " + key + " expects true or false, got \"" + v + "\"");
}

inline PhysicsLaw to_law(const std::string& v) {
  if (auto law = law_from_token(v)) return *law;
  throw format_error("config: unknown law \"" + v + "\"");
}

inline std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(to_int(key, item)));
  }
  return out;
}

}  // namespace config_detail

// Applies every recognised key; unknown keys are rejected so typos surface.
inline void apply_config(const ConfigMap& map, PipelineConfig& cfg) {
  using namespace config_detail;
  for (const auto& [key, v] : map) {
    if (key == "frame_count") cfg.frame_count = static_cast<int>(to_int(key, v));
    else if (key == "keyframe_count") cfg.keyframe_count = static_cast<int>(to_int(key, v));
    else if (key == "width") cfg.width = static_cast<int>(to_int(key, v));
    else if (key == "height") cfg.height = static_cast<int>(to_int(key, v));
    else if (key == "seed") cfg.seed = to_u64(key, v);
    else if (key == "seed2") cfg.seed2 = to_u64(key, v);
    else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, v));
    else if (key == "strict") cfg.strict = to_bool(key, v);
    else if (key == "ablate") cfg.ablation = ablation_from_token(v);
    else if (key == "law") cfg.law = to_law(v);
    else if (key == "mock") cfg.mock = to_bool(key, v);
    else if (key == "gamma_even") cfg.schedule.gamma_even = to_double(key, v);
    else if (key == "gamma_odd") cfg.schedule.gamma_odd = to_double(key, v);
    else if (key == "tolerance") cfg.gravity_tolerance = to_double(key, v);
    else if (key == "momentum_tolerance") cfg.momentum_tolerance = to_double(key, v);
    else if (key == "melting") cfg.melting = to_bool(key, v);
    else if (key == "draw_order") cfg.draw_order = to_int_list(key, v);
    else if (key == "vlm.endpoint") cfg.vlm.endpoint_url = v;
    else if (key == "vlm.model") cfg.vlm.model_name = v;
    else if (key == "vlm.api_key_env") cfg.vlm.api_key_env = v;
    else if (key == "vlm.timeout") cfg.vlm.timeout_s = to_double(key, v);
    else if (key == "vlm.max_retries") cfg.vlm.max_retries = static_cast<int>(to_int(key, v));
    else if (key == "vlm.cache_dir") cfg.vlm.cache_dir = v;
    else if (key == "mock.g") cfg.mock_params.gravity.g = to_double(key, v);
    else if (key == "mock.vy") cfg.mock_params.gravity.vy = to_double(key, v);
    else if (key == "mock.vx") cfg.mock_params.gravity.vx = to_double(key, v);
    else if (key == "mock.restitution") cfg.mock_params.gravity.restitution = to_double(key, v);
    else if (key == "mock.floor_y") cfg.mock_params.gravity.floor_y = to_double(key, v);
    else if (key == "mock.profile") {
      if (v != "physics" && v != "constant") throw format_error("config: mock.profile expects physics or constant");
      cfg.mock_constant = v == "constant";
    } else if (key == "mock.cv_vx") cfg.mock_params.constant.vx = to_double(key, v);
    else if (key == "mock.cv_vy") cfg.mock_params.constant.vy = to_double(key, v);
    else if (key.rfind("mock.velocity.", 0) == 0) {
      cfg.mock_params.collision.velocity[static_cast<int>(to_int(key, key.substr(14)))] = to_double(key, v);
    } else if (key.rfind("masses.", 0) == 0) {
      const int id = static_cast<int>(to_int(key, key.substr(7)));
      const double m = to_double(key, v);
      if (!(m > 0.0)) throw format_error("config: " + key + " must be positive");
      cfg.masses[id] = m;
      cfg.mock_params.collision.mass[id] = m;
    } else {
      throw format_error("config: unknown key \"" + key + "\"");
    }
  }
}

inline void check_config(const PipelineConfig& cfg) {
  if (cfg.keyframe_count < 2) throw precondition_error("config: keyframe_count must be at least 2");
  if (cfg.frame_count < cfg.keyframe_count) throw precondition_error("config: frame_count must be >= keyframe_count");
  if (cfg.width < min_scene_extent || cfg.height < min_scene_extent) {
    throw precondition_error("config: width and height must be at least 16");
  }
  if (!cfg.schedule.valid()) throw precondition_error("config: gamma values must lie in [0, 1]");
  if (cfg.vlm.max_retries < 0) throw precondition_error("config: vlm.max_retries must be nonnegative");
  if (cfg.threads < 1) throw precondition_error("config: threads must be at least 1");
}

// Config echo for the manifest. The API key itself is never recorded.
inline nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json masses = nlohmann::json::object();
  for (const auto& [id, m] : cfg.masses) masses[std::to_string(id)] = m;
  nlohmann::json velocity = nlohmann::json::object();
  for (const auto& [id, v] : cfg.mock_params.collision.velocity) velocity[std::to_string(id)] = v;
  const auto& g = cfg.mock_params.gravity;
  return {
      {"frame_count", cfg.frame_count},
      {"keyframe_count", cfg.keyframe_count},
      {"width", cfg.width},
      {"height", cfg.height},
      {"ablate", to_token(cfg.ablation)},
      {"law", cfg.law ? nlohmann::json(std::string(to_token(*cfg.law))) : nlohmann::json(nullptr)},
      {"mock", cfg.mock},
      {"strict", cfg.strict},
      {"gamma_even", cfg.schedule.gamma_even},
      {"gamma_odd", cfg.schedule.gamma_odd},
      {"tolerance", cfg.gravity_tolerance},
      {"momentum_tolerance", cfg.momentum_tolerance},
      {"melting", cfg.melting},
      {"draw_order", cfg.draw_order},
      {"masses", masses},
      {"vlm",
       {{"endpoint", cfg.vlm.endpoint_url},
        {"model", cfg.vlm.model_name},
        {"api_key_env", cfg.vlm.api_key_env},
        {"timeout", cfg.vlm.timeout_s},
        {"max_retries", cfg.vlm.max_retries},
        {"cache_dir", cfg.vlm.cache_dir}}},
      {"mock_params",
       {{"g", g.g},
        {"vy", g.vy},
        {"vx", g.vx},
        {"restitution", g.restitution},
        {"floor_y", g.floor_y ? nlohmann::json(*g.floor_y) : nlohmann::json(nullptr)},
        {"profile", cfg.mock_constant ? "constant" : "physics"},
        {"cv_vx", cfg.mock_params.constant.vx},
        {"cv_vy", cfg.mock_params.constant.vy},
        {"velocity", velocity}}},
  };
}

}  // namespace vlipp
