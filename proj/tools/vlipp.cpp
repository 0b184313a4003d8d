// vlipp command line: the full pipeline and each stage on its own.
//
// exit codes: 0 ok, 1 usage or I/O error, 2 validation failure,
//             3 VLM or network failure, 4 malformed artifact

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlipp/config.hpp"
#include "vlipp/error.hpp"
#include "vlipp/formats.hpp"
#include "vlipp/hash.hpp"
#include "vlipp/inspect.hpp"
#include "vlipp/pipeline.hpp"
#include "vlipp/planner/http_transport.hpp"
#include "vlipp/scene_io.hpp"
#include "vlipp/trajectory.hpp"

namespace fs = std::filesystem;
using namespace vlipp;

namespace {

// Flags shared by every subcommand. Unset flags leave the config file value.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> seed2;
  std::optional<int> threads;
  std::optional<int> frames;
  std::optional<int> keyframes;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<double> gamma_even;
  std::optional<double> gamma_odd;
  std::optional<std::string> law;
  std::optional<std::string> ablate;
  std::optional<std::string> model;
  std::optional<std::string> endpoint;
  std::optional<std::string> cache_dir;
  std::optional<std::string> mock_profile;
  bool mock = false;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--seed", seed, "seed of the warped noise");
    app->add_option("--seed2", seed2, "seed of the injected noise");
    app->add_option("--threads", threads, "worker threads");
    app->add_option("--frames", frames, "output frame count");
    app->add_option("--keyframes", keyframes, "planner keyframe count");
    app->add_option("--width", width, "frame width");
    app->add_option("--height", height, "frame height");
    app->add_option("--gamma-even", gamma_even, "injection weight on even frames");
    app->add_option("--gamma-odd", gamma_odd, "injection weight on odd frames");
    app->add_option("--law", law, "physics law, skips classification");
    app->add_option("--ablate", ablate, "none, no-planner, no-context, no-cot, no-cc");
    app->add_option("--model", model, "VLM model name");
    app->add_option("--endpoint", endpoint, "chat completions URL");
    app->add_option("--cache-dir", cache_dir, "VLM response cache");
    app->add_flag("--mock", mock, "plan with the analytic mock instead of the VLM");
    app->add_option("--mock-profile", mock_profile, "physics (default) or constant");
    app->add_flag("--strict", strict, "abort when a physics check fails");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config(load_config_file(config_path), cfg);
    if (seed) cfg.seed = *seed;
    if (seed2) cfg.seed2 = *seed2;
    if (threads) cfg.threads = *threads;
    if (frames) cfg.frame_count = *frames;
    if (keyframes) cfg.keyframe_count = *keyframes;
    if (width) cfg.width = *width;
    if (height) cfg.height = *height;
    if (gamma_even) cfg.schedule.gamma_even = *gamma_even;
    if (gamma_odd) cfg.schedule.gamma_odd = *gamma_odd;
    if (law) {
      const auto l = law_from_token(*law);
      if (!l) throw precondition_error("unknown law \"" + *law + "\"");
      cfg.law = *l;
    }
    if (ablate) cfg.ablation = ablation_from_token(*ablate);
    if (model) cfg.vlm.model_name = *model;
    if (endpoint) cfg.vlm.endpoint_url = *endpoint;
    if (cache_dir) cfg.vlm.cache_dir = *cache_dir;
    if (mock) cfg.mock = true;
    if (mock_profile) apply_config({{"mock.profile", *mock_profile}}, cfg);
    if (strict) cfg.strict = true;
    check_config(cfg);
    return cfg;
  }
};

void print_hash(const fs::path& p) { std::cout << "sha256 " << sha256_file_hex(p.string()) << "  " << p.string() << "\n"; }

std::unique_ptr<planner::ChatTransport> make_transport(const PipelineConfig& cfg) {
  if (cfg.mock) return nullptr;
  return std::make_unique<planner::HttpTransport>(cfg.vlm);
}

// Scene from --scene, or assembled from --image / --description / --object.
struct SceneFlags {
  std::string scene_path;
  std::string image;
  std::string description;
  std::vector<std::string> objects;  // "label:x,y,w,h"
  std::vector<std::string> masks;

  void attach(CLI::App* app, bool inline_allowed) {
    app->add_option("--scene", scene_path, "scene.json");
    if (!inline_allowed) return;
    app->add_option("--image", image, "first frame PNG");
    app->add_option("--description", description, "text description of the scene");
    app->add_option("--object", objects, "label:x,y,w,h (repeatable; ids follow order)");
    app->add_option("--mask", masks, "mask PNG per --object, same order");
  }

  InputScene load() const {
    if (!scene_path.empty()) return load_scene(scene_path);
    if (image.empty()) throw precondition_error("give --scene or --image with --object");
    InputScene s;
    s.image = read_png(image);
    s.description = description;
    if (!masks.empty() && masks.size() != objects.size()) throw precondition_error("--mask count differs from --object count");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto colon = objects[i].rfind(':');
      if (colon == std::string::npos) throw precondition_error("--object expects label:x,y,w,h");
      BoundingBox b;
      if (std::sscanf(objects[i].c_str() + colon + 1, "%lf,%lf,%lf,%lf", &b.x, &b.y, &b.w, &b.h) != 4) {
        throw precondition_error("--object expects label:x,y,w,h, got " + objects[i]);
      }
      SceneObject o{static_cast<int>(i), objects[i].substr(0, colon), b, {}};
      o.mask = masks.empty() ? box_mask(s.height(), s.width(), b) : read_mask_png(masks[i]);
      s.objects.push_back(std::move(o));
    }
    return s;
  }
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return 2;
    case ErrorKind::network: return 3;
    case ErrorKind::format: return 4;
    case ErrorKind::precondition:
    case ErrorKind::io: return 1;
  }
  return 1;
}

PipelineConfig with_dims(PipelineConfig cfg, const InterpolatedTrajectory& traj) {
  cfg.width = traj.width;
  cfg.height = traj.height;
  cfg.frame_count = traj.frame_count;
  cfg.keyframe_count = traj.keyframe_count;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlipp: physics-planned structured noise for image-to-video generation"};
  app.require_subcommand(1);

  CommonFlags common;
  SceneFlags scene_flags;
  std::string out;

  auto* pipeline = app.add_subcommand("pipeline", "run every stage into one output directory");
  common.attach(pipeline);
  scene_flags.attach(pipeline, true);
  pipeline->add_option("--out", out, "run directory")->required();

  auto* plan = app.add_subcommand("plan", "classify the law and plan keyframe boxes");
  common.attach(plan);
  scene_flags.attach(plan, true);
  std::string report_out;
  plan->add_option("--out", out, "plan.json")->required();
  plan->add_option("--report", report_out, "also write the physics report here");

  auto* interp = app.add_subcommand("interpolate", "expand a keyframe plan to every frame");
  common.attach(interp);
  std::string plan_path;
  interp->add_option("--plan", plan_path, "plan.json")->required();
  interp->add_option("--out", out, "trajectory.json")->required();

  auto* animate = app.add_subcommand("animate", "render the synthetic video");
  common.attach(animate);
  scene_flags.attach(animate, false);
  std::string traj_path;
  animate->add_option("--trajectory", traj_path, "trajectory.json")->required();
  animate->add_option("--out", out, "frame directory")->required();

  auto* flow = app.add_subcommand("flow", "analytic optical flow of the synthetic video");
  common.attach(flow);
  scene_flags.attach(flow, false);
  flow->add_option("--trajectory", traj_path, "trajectory.json")->required();
  flow->add_option("--out", out, "flow.vlipf")->required();

  auto* noise = app.add_subcommand("noise", "warp and inject noise along a flow file");
  common.attach(noise);
  std::string flow_path;
  int channels = 3;
  noise->add_option("--flow", flow_path, "flow.vlipf")->required();
  noise->add_option("--channels", channels, "noise channels")->check(CLI::PositiveNumber);
  noise->add_option("--out", out, "noise.vlipq")->required();

  auto* inspect = app.add_subcommand("inspect", "summarise a run directory or artifact");
  common.attach(inspect);
  std::string inspect_target;
  std::string preview;
  inspect->add_option("path", inspect_target, "run directory, .vlipf, .vlipq or JSON artifact")->required();
  inspect->add_option("--preview", preview, "write preview PNGs here");

  auto* demo = app.add_subcommand("demo-scene", "write a synthetic demo scene");
  common.attach(demo);
  std::string demo_kind = "gravity";
  demo->add_option("--kind", demo_kind, "gravity or momentum");
  demo->add_option("--out", out, "scene directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = common.resolve();

    if (*pipeline) {
      auto transport = make_transport(cfg);
      const auto result = run_pipeline(scene_flags.load(), cfg, out, transport.get(), &std::cerr);
      for (const auto& [rel, hex] : result.manifest.at("files").items()) {
        std::cout << "sha256 " << hex.get<std::string>() << "  " << (fs::path(out) / rel).string() << "\n";
      }
      print_hash(fs::path(out) / "manifest.json");
    } else if (*plan) {
      auto transport = make_transport(cfg);
      const InputScene scene = prepare_scene(scene_flags.load(), cfg);
      const PlanStage ps = stage_plan(scene, cfg, transport.get());
      for (const auto& w : ps.warnings) std::cerr << "warning: " << w << "\n";
      if (!report_out.empty()) {
        write_json_file(report_out, to_json(ps.report));
        print_hash(report_out);
      }
      std::cerr << "physics check: " << to_token(ps.report.overall()) << "\n";
      if (cfg.strict) require_report_ok(ps.report);
      write_json_file(out, to_json(ps.plan));
      print_hash(out);
    } else if (*interp) {
      const auto p = plan_from_json(read_json_file(plan_path));
      write_json_file(out, to_json(interpolate(p, cfg.frame_count)));
      print_hash(out);
    } else if (*animate) {
      const auto traj = trajectory_from_json(read_json_file(traj_path));
      const auto c = with_dims(cfg, traj);
      write_frames(stage_animate(prepare_scene(scene_flags.load(), c), traj, c), out, c.threads);
      for (int t = 0; t < traj.frame_count; ++t) print_hash(fs::path(out) / frame_file_name(t));
    } else if (*flow) {
      const auto traj = trajectory_from_json(read_json_file(traj_path));
      const auto c = with_dims(cfg, traj);
      write_bytes(out, encode_flow(stage_flow(prepare_scene(scene_flags.load(), c), traj, c)));
      print_hash(out);
    } else if (*noise) {
      write_bytes(out, encode_noise(stage_noise(read_file_bytes(flow_path), channels, cfg)));
      print_hash(out);
    } else if (*inspect) {
      std::optional<fs::path> pv;
      if (!preview.empty()) pv = preview;
      std::cout << inspect_path(inspect_target, pv);
    } else if (*demo) {
      DemoKind kind;
      if (demo_kind == "gravity") kind = DemoKind::gravity;
      else if (demo_kind == "momentum") kind = DemoKind::momentum;
      else throw precondition_error("--kind expects gravity or momentum");
      const auto d = make_demo_scene(kind, cfg.width, cfg.height);
      save_scene(d.scene, out);
      write_text_file((fs::path(out) / "config.toml").string(), d.config_text);
      print_hash(fs::path(out) / "scene.json");
      print_hash(fs::path(out) / "first_frame.png");
      print_hash(fs::path(out) / "config.toml");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
