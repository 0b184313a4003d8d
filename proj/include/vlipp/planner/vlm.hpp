#pragma once

// VLM planning client: law classification and trajectory planning over a
// chat-completion style API, with a content-addressed response cache.
//
// The network layer is abstracted behind ChatTransport so everything here
// runs offline against scripted transports; http_transport.hpp supplies the
// real one.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/hash.hpp"
#include "vlipp/planner/prompt.hpp"
#include "vlipp/scene.hpp"

namespace vlipp::planner {

struct VlmConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";  // name of the variable, never the key
  double timeout_s = 120.0;
  int max_retries = 2;
  std::string cache_dir = "vlm_cache";
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string text;
  const std::vector<std::uint8_t>* png = nullptr;  // optional image attachment
};

// One request/response exchange. Implementations own retries and raise
// network errors once those are exhausted.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual nlohmann::json send(const nlohmann::json& request) = 0;
};

inline nlohmann::json build_chat_request(const VlmConfig& cfg, const std::vector<ChatMessage>& messages) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    if (m.png == nullptr) {
      msgs.push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    nlohmann::json parts = nlohmann::json::array();
    parts.push_back({{"type", "text"}, {"text", m.text}});
    parts.push_back({{"type", "image_url"},
                     {"image_url", {{"url", "data:image/png;base64," + base64_encode(*m.png)}}}});
    msgs.push_back({{"role", m.role}, {"content", std::move(parts)}});
  }
  return {{"model", cfg.model_name}, {"messages", std::move(msgs)}, {"temperature", 0}};
}

// Assistant text of a chat-completion response.
inline std::string response_text(const nlohmann::json& response) {
  try {
    const auto& content = response.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") out += part.value("text", "");
    }
    return out;
  } catch (const nlohmann::json::exception&) {
    throw network_error("vlm: response has no choices[0].message.content");
  }
}

// ---------------------------------------------------------------------------
// Cache: <cache_dir>/<sha256>.json, written atomically.

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<nlohmann::json> load(const std::string& key) const {
    if (dir_.empty()) return std::nullopt;
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;  // a corrupt entry is treated as a miss and overwritten
    }
  }

  void store(const std::string& key, const nlohmann::json& entry) const {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    const auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw io_error("vlm cache: cannot write " + tmp.string());
      out << entry.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, final_path);
  }

 private:
  std::filesystem::path dir_;
};

inline std::string plan_cache_key(const PromptBundle& bundle, const std::string& model_name) {
  Sha256 h;
  h.update(serialize_prompt(bundle));
  h.update(bundle.image_payload);
  h.update(model_name);
  const auto d = h.finish();
  return to_hex(d);
}

inline std::string classify_cache_key(const std::string& description, const std::string& model_name) {
  Sha256 h;
  h.update(classify_system_text());
  h.update(description);
  h.update(model_name);
  const auto d = h.finish();
  return to_hex(d);
}

// ---------------------------------------------------------------------------
// Law classification

// Normalizes an answer such as "Momentum conservation." to a law token.
inline std::optional<PhysicsLaw> parse_law_answer(std::string_view answer) {
  std::string s;
  for (char ch : answer) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) s.push_back(static_cast<char>(std::tolower(c)));
    else if (c == ' ' || c == '_' || c == '-') s.push_back('_');
  }
  const auto first = s.find_first_not_of('_');
  if (first == std::string::npos) return std::nullopt;
  s = s.substr(first, s.find_last_not_of('_') - first + 1);
  std::string collapsed;
  for (char c : s) {
    if (c == '_' && !collapsed.empty() && collapsed.back() == '_') continue;
    collapsed.push_back(c);
  }
  return law_from_token(collapsed);
}

struct ClassifyResult {
  PhysicsLaw law = PhysicsLaw::gravity;
  bool cache_hit = false;
  int requests = 0;
};

inline ClassifyResult classify_law_detailed(const std::string& description, const VlmConfig& cfg,
                                            ChatTransport& transport) {
  if (description.empty()) throw precondition_error("classify_law: description is empty");
  const ResponseCache cache(cfg.cache_dir);
  const std::string key = classify_cache_key(description, cfg.model_name);
  if (auto hit = cache.load(key); hit && hit->contains("law")) {
    if (auto law = law_from_token(hit->at("law").get<std::string>())) return {*law, true, 0};
  }

  std::vector<ChatMessage> messages{{"system", classify_system_text()}, {"user", description}};
  ClassifyResult result;
  std::vector<std::string> raw;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string answer = response_text(transport.send(build_chat_request(cfg, messages)));
    ++result.requests;
    raw.push_back(answer);
    if (auto law = parse_law_answer(answer)) {
      result.law = *law;
      cache.store(key, {{"raw_response", raw}, {"law", std::string(to_token(*law))}});
      return result;
    }
    messages.push_back({"assistant", answer});
    messages.push_back({"user", "That answer is not one of the allowed tokens. Reply with exactly one of:" +
                                    classify_system_text().substr(classify_system_text().find(':') + 1)});
  }
  throw network_error("classify_law: unparseable answer after reprompt: \"" + raw.back() + "\"");
}

inline PhysicsLaw classify_law(const std::string& description, const VlmConfig& cfg, ChatTransport& transport) {
  return classify_law_detailed(description, cfg, transport).law;
}

// ---------------------------------------------------------------------------
// Trajectory planning

// Body of the last ```json fenced block in `text`.
inline std::optional<std::string> extract_json_block(const std::string& text) {
  const std::string open = "```json";
  const auto start = text.rfind(open);
  if (start == std::string::npos) return std::nullopt;
  const auto body = start + open.size();
  const auto end = text.find("```", body);
  if (end == std::string::npos) return std::nullopt;
  return text.substr(body, end - body);
}

struct ParsedPlan {
  TrajectoryPlan plan;
  std::vector<std::string> warnings;
};

// Schema-level parse of a model answer against the scene it was asked about.
// Throws format errors, which earn the model one repair turn.
inline ParsedPlan parse_plan_answer(const std::string& answer, const InputScene& scene, int keyframe_count) {
  const auto block = extract_json_block(answer);
  if (!block) throw format_error("no ```json fenced block found in the answer");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*block);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error(std::string("JSON block does not parse: ") + e.what());
  }
  ParsedPlan out;
  out.plan = plan_from_json(j);
  if (out.plan.keyframe_count != keyframe_count) {
    throw format_error("keyframe_count is " + std::to_string(out.plan.keyframe_count) + ", expected " +
                       std::to_string(keyframe_count));
  }
  if (out.plan.width != scene.width() || out.plan.height != scene.height()) {
    out.warnings.push_back("plan image size differs from the scene; using the scene size");
    out.plan.width = scene.width();
    out.plan.height = scene.height();
  }
  std::vector<Track> kept;
  for (auto& t : out.plan.tracks) {
    const SceneObject* obj = scene.find(t.object_id);
    if (obj == nullptr) {
      out.warnings.push_back("dropped track for unknown object " + std::to_string(t.object_id));
      continue;
    }
    if (t.label.empty()) t.label = obj->label;
    kept.push_back(std::move(t));
  }
  out.plan.tracks = std::move(kept);
  if (out.plan.tracks.empty()) throw format_error("no track refers to a scene object");
  std::sort(out.plan.tracks.begin(), out.plan.tracks.end(),
            [](const Track& a, const Track& b) { return a.object_id < b.object_id; });
  return out;
}

struct PlanResult {
  TrajectoryPlan plan;
  std::vector<std::string> warnings;
  bool cache_hit = false;
  int requests = 0;
};

inline PlanResult plan_trajectory_detailed(const InputScene& scene, const PromptBundle& bundle, const VlmConfig& cfg,
                                           ChatTransport& transport) {
  const ResponseCache cache(cfg.cache_dir);
  const std::string key = plan_cache_key(bundle, cfg.model_name);
  if (auto hit = cache.load(key); hit && hit->contains("plan")) {
    return {plan_from_json(hit->at("plan")), {}, true, 0};
  }

  std::vector<ChatMessage> messages{{"system", bundle.system_text},
                                    {"user", user_text(bundle), &bundle.image_payload}};
  PlanResult result;
  std::vector<std::string> raw;
  std::optional<ParsedPlan> parsed;
  for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
    const std::string answer = response_text(transport.send(build_chat_request(cfg, messages)));
    ++result.requests;
    raw.push_back(answer);
    try {
      parsed = parse_plan_answer(answer, scene, bundle.keyframe_count);
    } catch (const Error& e) {
      if (attempt == 1) throw network_error("plan_trajectory: answer unusable after repair: " + std::string(e.what()));
      messages.push_back({"assistant", answer});
      messages.push_back({"user", "Your answer could not be used: " + std::string(e.what()) +
                                      ". Reply with only the corrected ```json block following the required schema."});
    }
  }

  TrajectoryPlan plan = std::move(parsed->plan);
  plan.law = bundle.law;
  plan.provenance = {PlanSource::vlm, key};
  if (const auto diags = validate_plan(plan, &scene); !diags.empty()) {
    throw validation_error("plan_trajectory: " + diags.front().message);
  }
  cache.store(key, {{"raw_response", raw}, {"plan", to_json(plan)}});
  result.plan = std::move(plan);
  result.warnings = std::move(parsed->warnings);
  return result;
}

inline TrajectoryPlan plan_trajectory(const InputScene& scene, const PromptBundle& bundle, const VlmConfig& cfg,
                                      ChatTransport& transport) {
  return plan_trajectory_detailed(scene, bundle, cfg, transport).plan;
}

}  // namespace vlipp::planner
