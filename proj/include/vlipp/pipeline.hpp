#pragma once

// End-to-end run: law -> plan -> checks -> interpolation -> synthetic video
// -> flow -> warped noise -> injection, written as one run directory.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/crypto.h>
#include <png.h>

#include "vlipp/animator.hpp"
#include "vlipp/config.hpp"
#include "vlipp/flow.hpp"
#include "vlipp/formats.hpp"
#include "vlipp/hash.hpp"
#include "vlipp/image_io.hpp"
#include "vlipp/noise.hpp"
#include "vlipp/parallel.hpp"
#include "vlipp/physics_check.hpp"
#include "vlipp/planner/mock.hpp"
#include "vlipp/planner/prompt.hpp"
#include "vlipp/planner/vlm.hpp"
#include "vlipp/scene.hpp"
#include "vlipp/scene_io.hpp"
#include "vlipp/trajectory.hpp"

namespace vlipp {

inline constexpr const char* version_string = "1.0.0";

inline std::string frame_file_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.png", t);
  return buf;
}

inline InputScene prepare_scene(const InputScene& scene, const PipelineConfig& cfg) {
  InputScene s = fit_scene(scene, cfg.width, cfg.height);
  if (const auto diags = validate_scene(s); !diags.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& d : diags) msg += "\n  " + d.message;
    throw validation_error(msg);
  }
  return s;
}

inline PhysicsLaw resolve_law(const InputScene& scene, const PipelineConfig& cfg, planner::ChatTransport* transport) {
  if (cfg.law) return *cfg.law;
  if (cfg.mock || transport == nullptr) {
    throw precondition_error("no physics law given; pass --law when planning without a VLM");
  }
  return planner::classify_law(scene.description, cfg.vlm, *transport);
}

// Physics checks chosen by law, all judged on the keyframes: their spacing is
// uniform, while interpolated anchors alternate 4- and 5-frame gaps.
inline ValidationReport physics_report(const TrajectoryPlan& plan, const PipelineConfig& cfg) {
  ValidationReport report{plan.law, {}};
  if (plan.law == PhysicsLaw::gravity) {
    report.merge(check_gravity(plan, cfg.gravity_tolerance));
  } else if (plan.law == PhysicsLaw::momentum_conservation) {
    report.merge(check_momentum(plan, cfg.masses, cfg.momentum_tolerance));
  }
  report.merge(check_containment_and_shape(plan, plan.width, plan.height, plan.law, ShapeHints{cfg.melting}));
  return report;
}

// Runs fn, prefixing any library error with the stage name.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  }
}

struct PlanStage {
  TrajectoryPlan plan;
  ValidationReport report;
  std::optional<planner::PromptBundle> prompt;
  std::vector<std::string> warnings;
};

// `scene` must already be prepared. The prompt is assembled even for mock
// planning so ablations can be inspected offline.
inline PlanStage stage_plan(const InputScene& scene, const PipelineConfig& cfg, planner::ChatTransport* transport) {
  const auto mode = cfg.mode();
  if (!mode.use_planner) throw precondition_error("planning is disabled by the no-planner ablation");
  PlanStage out;
  const PhysicsLaw law = resolve_law(scene, cfg, transport);
  out.prompt = planner::build_prompt(scene, law, mode, cfg.keyframe_count);
  if (cfg.mock && cfg.mock_constant) {
    const auto& c = cfg.mock_params.constant;
    out.plan = planner::constant_velocity_plan(scene, law, c.vx, c.vy, cfg.keyframe_count);
  } else if (cfg.mock) {
    out.plan = planner::mock_plan(scene, law, cfg.mock_params, cfg.keyframe_count);
  } else {
    if (transport == nullptr) throw precondition_error("VLM planning needs a transport");
    auto r = planner::plan_trajectory_detailed(scene, *out.prompt, cfg.vlm, *transport);
    out.plan = std::move(r.plan);
    out.warnings = std::move(r.warnings);
  }
  out.report = physics_report(out.plan, cfg);
  return out;
}

inline void require_report_ok(const ValidationReport& report) {
  if (report.overall() != CheckStatus::fail) return;
  std::string msg = "physics validation failed:";
  for (const auto& c : report.checks) {
    if (c.status == CheckStatus::fail) msg += "\n  " + c.name + ": " + c.message;
  }
  throw validation_error(msg);
}

inline SyntheticVideo stage_animate(const InputScene& scene, const InterpolatedTrajectory& traj, const PipelineConfig& cfg) {
  const Background bg = inpaint_background(scene);
  return render_video(bg, scene, traj, {cfg.draw_order, cfg.threads});
}

inline FlowSequence stage_flow(const InputScene& scene, const InterpolatedTrajectory& traj, const PipelineConfig& cfg) {
  return analytic_flow_sequence(traj, scene, cfg.draw_order, cfg.threads);
}

// Noise from an encoded flow file, so stage-by-stage runs and the full
// pipeline hash the same bytes.
inline NoiseTensor stage_noise(const std::vector<std::uint8_t>& flow_bytes, int channels, const PipelineConfig& cfg) {
  const FlowSequence flows = decode_flow(flow_bytes);
  NoiseTensor q = warp_noise(flows, {channels, flows.height, flows.width}, cfg.seed, sha256(flow_bytes));
  return inject(std::move(q), cfg.schedule, cfg.seed2, cfg.threads);
}

inline void write_frames(const SyntheticVideo& video, const std::filesystem::path& dir, int threads) {
  std::filesystem::create_directories(dir);
  parallel_for(static_cast<int>(video.frames.size()), threads, [&](int t) {
    write_bytes((dir / frame_file_name(t)).string(), encode_png(video.frames[t], 3));
  });
}

inline nlohmann::json library_versions() {
  return {{"vlipp", version_string},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"openssl", OpenSSL_version(OPENSSL_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

// Hashes of every regular file under dir, keyed by relative path.
inline nlohmann::json hash_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    files[rel] = sha256_file_hex(e.path().string());
  }
  return files;
}

// Removes the staging directory unless the run commits.
class StagingDir {
 public:
  explicit StagingDir(std::filesystem::path final_dir) : final_(std::move(final_dir)) {
    path_ = final_;
    path_ += ".partial";
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;
  ~StagingDir() {
    if (!committed_) {
      std::error_code ec;
      std::filesystem::remove_all(path_, ec);
    }
  }

  const std::filesystem::path& path() const noexcept { return path_; }

  void commit() {
    namespace fs = std::filesystem;
    if (fs::exists(final_)) {
      const bool previous_run = fs::exists(final_ / "manifest.json");
      const bool empty = fs::is_directory(final_) && fs::is_empty(final_);
      if (!previous_run && !empty) {
        throw io_error("refusing to replace " + final_.string() + ": it exists and holds no previous run");
      }
      fs::remove_all(final_);
    }
    fs::rename(path_, final_);
    committed_ = true;
  }

 private:
  std::filesystem::path final_;
  std::filesystem::path path_;
  bool committed_ = false;
};

struct PipelineResult {
  nlohmann::json manifest;
  std::optional<ValidationReport> report;
  std::vector<std::string> warnings;
  std::string noise_sha256;
};

inline PipelineResult run_pipeline(const InputScene& input, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                                   planner::ChatTransport* transport, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  check_config(cfg);
  const InputScene scene = in_stage("scene", [&] { return prepare_scene(input, cfg); });
  auto note = [&](const std::string& s) {
    if (log) *log << s << "\n";
  };

  StagingDir staging(out_dir);
  const fs::path dir = staging.path();
  PipelineResult result;
  nlohmann::json manifest{{"tool", "vlipp"},
                          {"versions", library_versions()},
                          {"config", to_json(cfg)},
                          {"ablation", to_token(cfg.ablation)},
                          {"seeds", {{"seed", cfg.seed}, {"seed2", cfg.seed2}}}};
  const int channels = 3;
  NoiseTensor q;

  if (!cfg.mode().use_planner) {
    note("no-planner ablation: iid noise");
    q = degrade_to_random({channels, scene.height(), scene.width()}, cfg.frame_count, cfg.seed, cfg.threads);
    manifest["schedule"] = nullptr;
    manifest["plan_source"] = nullptr;
  } else {
    PlanStage ps = in_stage("plan", [&] { return stage_plan(scene, cfg, transport); });
    result.warnings = ps.warnings;
    for (const auto& w : ps.warnings) note("warning: " + w);
    write_json_file((dir / "report.json").string(), to_json(ps.report));
    note(std::string("physics check: ") + to_token(ps.report.overall()));
    if (cfg.strict) in_stage("physics-check", [&] { require_report_ok(ps.report); });
    write_text_file((dir / "prompt.txt").string(), planner::serialize_prompt(*ps.prompt));
    write_json_file((dir / "plan.json").string(), to_json(ps.plan));

    const InterpolatedTrajectory traj = in_stage("interpolate", [&] { return interpolate(ps.plan, cfg.frame_count); });
    write_json_file((dir / "trajectory.json").string(), to_json(traj));

    note("rendering " + std::to_string(cfg.frame_count) + " frames");
    in_stage("animate", [&] { write_frames(stage_animate(scene, traj, cfg), dir / "frames", cfg.threads); });

    const auto flow_bytes = in_stage("flow", [&] { return encode_flow(stage_flow(scene, traj, cfg)); });
    write_bytes((dir / "flow.vlipf").string(), flow_bytes);

    note("warping noise");
    q = in_stage("noise", [&] { return stage_noise(flow_bytes, channels, cfg); });
    manifest["law"] = std::string(to_token(ps.plan.law));
    manifest["plan_source"] = std::string(to_token(ps.plan.provenance.source));
    manifest["report_overall"] = to_token(ps.report.overall());
    manifest["schedule"] = {{"gamma_even", cfg.schedule.gamma_even}, {"gamma_odd", cfg.schedule.gamma_odd}};
    result.report = std::move(ps.report);
  }

  const auto noise_bytes = encode_noise(q);
  write_bytes((dir / "noise.vlipq").string(), noise_bytes);
  result.noise_sha256 = to_hex(sha256(noise_bytes));
  manifest["noise"] = {{"frames", q.frames}, {"channels", q.channels}, {"height", q.height}, {"width", q.width},
                       {"sha256", result.noise_sha256}};
  manifest["files"] = hash_tree(dir);
  write_json_file((dir / "manifest.json").string(), manifest);
  staging.commit();
  result.manifest = std::move(manifest);
  return result;
}

// Recomputes every file hash listed in a run's manifest; returns the
// mismatching or missing paths.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir) {
  const auto manifest = read_json_file((run_dir / "manifest.json").string());
  std::vector<std::string> bad;
  for (const auto& [rel, hex] : manifest.at("files").items()) {
    const auto p = run_dir / rel;
    if (!std::filesystem::exists(p) || sha256_file_hex(p.string()) != hex.get<std::string>()) bad.push_back(rel);
  }
  return bad;
}

}  // namespace vlipp
