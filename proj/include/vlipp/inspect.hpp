#pragma once

// Human-readable summaries of run artifacts, plus preview images:
// flow as a colour wheel, trajectory boxes drawn over the rendered frames.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vlipp/flow.hpp"
#include "vlipp/formats.hpp"
#include "vlipp/image_io.hpp"
#include "vlipp/noise.hpp"
#include "vlipp/pipeline.hpp"
#include "vlipp/scene.hpp"
#include "vlipp/scene_io.hpp"

namespace vlipp {

struct FlowPercentiles {
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  double moving_fraction = 0.0;  // pixels with magnitude > 0
};

inline double nearest_rank(std::vector<float>& v, double p) {
  if (v.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::ceil(p * v.size())) - (p > 0.0 ? 1 : 0);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

inline FlowPercentiles flow_percentiles(const FlowSequence& seq) {
  std::vector<float> mags;
  mags.reserve(seq.fields.size() * static_cast<std::size_t>(seq.height) * seq.width);
  std::size_t moving = 0;
  for (const auto& f : seq.fields) {
    for (std::size_t i = 0; i < f.dx.pixels().size(); ++i) {
      const float m = std::hypot(f.dx.pixels()[i], f.dy.pixels()[i]);
      moving += m > 0.0f;
      mags.push_back(m);
    }
  }
  FlowPercentiles out;
  if (mags.empty()) return out;
  out.moving_fraction = static_cast<double>(moving) / mags.size();
  out.max = *std::max_element(mags.begin(), mags.end());
  out.p50 = nearest_rank(mags, 0.50);
  out.p90 = nearest_rank(mags, 0.90);
  out.p99 = nearest_rank(mags, 0.99);
  return out;
}

// Hue from direction, saturation from magnitude relative to max_mag; still
// pixels are white.
inline RgbImage flow_color(const FlowField& f, double max_mag) {
  RgbImage img(f.height(), f.width());
  for (int r = 0; r < f.height(); ++r) {
    for (int c = 0; c < f.width(); ++c) {
      const double dx = f.dx.at(r, c);
      const double dy = f.dy.at(r, c);
      const double s = max_mag > 0.0 ? std::min(1.0, std::hypot(dx, dy) / max_mag) : 0.0;
      const double hue = (std::atan2(dy, dx) / (2.0 * std::numbers::pi) + 0.5) * 6.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double k = std::fmod(hue + (ch == 0 ? 5.0 : ch == 1 ? 3.0 : 1.0), 6.0);
        img.at(r, c, ch) = clamp_u8(255.0 * (1.0 - s * std::clamp(std::min(k, 4.0 - k), 0.0, 1.0)));
      }
    }
  }
  return img;
}

inline void draw_rect(RgbImage& img, const BoundingBox& b, std::array<std::uint8_t, 3> color, int thickness = 2) {
  const PixelRect r = rasterize(b);
  auto put = [&](long y, long x) {
    if (y < 0 || x < 0 || y >= img.height() || x >= img.width()) return;
    for (int ch = 0; ch < 3; ++ch) img.at(static_cast<int>(y), static_cast<int>(x), ch) = color[ch];
  };
  for (int t = 0; t < thickness; ++t) {
    for (long x = r.left; x < r.left + r.width; ++x) {
      put(r.top + t, x);
      put(r.top + r.height - 1 - t, x);
    }
    for (long y = r.top; y < r.top + r.height; ++y) {
      put(y, r.left + t);
      put(y, r.left + r.width - 1 - t);
    }
  }
}

inline RgbImage draw_boxes(RgbImage frame, const InterpolatedTrajectory& traj, int t) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 4> palette = {
      {{255, 40, 40}, {40, 200, 40}, {40, 80, 255}, {240, 200, 0}}};
  for (std::size_t i = 0; i < traj.tracks.size(); ++i) {
    draw_rect(frame, traj.tracks[i].boxes.at(static_cast<std::size_t>(t)), palette[i % palette.size()]);
  }
  return frame;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string describe_noise(const NoiseTensor& q) {
  std::ostringstream out;
  out << "noise " << q.frames << " x " << q.channels << " x " << q.height << " x " << q.width << "  seed " << q.seed
      << "  seed2 " << q.seed2 << "\n";
  out << "flow hash " << to_hex(q.flow_hash) << "\n";
  out << "frame      mean  variance\n";
  for (int f = 0; f < q.frames; ++f) {
    const auto m = moments(q.frame(f));
    char buf[96];
    std::snprintf(buf, sizeof buf, "%5d  %+8.5f  %8.5f\n", f, m.mean, m.variance);
    out << buf;
  }
  out << "mean consecutive-frame correlation " << fmt("%.4f", mean_interframe_correlation(q)) << "\n";
  return out.str();
}

inline std::string describe_flow(const FlowSequence& seq) {
  std::ostringstream out;
  const auto p = flow_percentiles(seq);
  out << "flow " << seq.fields.size() << " fields of " << seq.height << " x " << seq.width << "\n";
  out << "magnitude px  p50 " << fmt("%.3f", p.p50) << "  p90 " << fmt("%.3f", p.p90) << "  p99 " << fmt("%.3f", p.p99)
      << "  max " << fmt("%.3f", p.max) << "\n";
  out << "moving pixels " << fmt("%.2f", 100.0 * p.moving_fraction) << "%\n";
  return out.str();
}

inline void write_flow_previews(const FlowSequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const double max_mag = std::max(1e-9, flow_percentiles(seq).max);
  for (std::size_t t = 0; t < seq.fields.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "flow_%04zu.png", t);
    write_png((dir / name).string(), flow_color(seq.fields[t], max_mag));
  }
}

// Summarises a run directory, a .vlipf/.vlipq file, or a plan/trajectory/
// report JSON. With preview_dir, also writes preview PNGs.
inline std::string inspect_path(const std::filesystem::path& path, const std::optional<std::filesystem::path>& preview_dir = {}) {
  namespace fs = std::filesystem;
  std::ostringstream out;
  if (fs::is_directory(path)) {
    const auto manifest = read_json_file((path / "manifest.json").string());
    out << "run " << path.string() << "  ablation " << manifest.value("ablation", "none");
    if (manifest.contains("law") && manifest["law"].is_string()) out << "  law " << manifest["law"].get<std::string>();
    out << "\n";
    const auto bad = verify_manifest(path);
    out << "manifest: " << manifest.at("files").size() << " files, "
        << (bad.empty() ? std::string("all hashes match") : std::to_string(bad.size()) + " mismatched") << "\n";
    for (const auto& b : bad) out << "  mismatch " << b << "\n";
    if (fs::exists(path / "report.json")) {
      const auto report = read_json_file((path / "report.json").string());
      out << "physics " << report.at("overall").get<std::string>() << "\n";
      for (const auto& c : report.at("checks")) {
        out << "  " << c.at("status").get<std::string>() << "  " << c.at("name").get<std::string>() << "  "
            << c.at("message").get<std::string>() << "\n";
      }
    }
    if (fs::exists(path / "flow.vlipf")) {
      const auto seq = read_flow_file((path / "flow.vlipf").string());
      out << describe_flow(seq);
      if (preview_dir) write_flow_previews(seq, *preview_dir / "flow");
    }
    out << describe_noise(read_noise_file((path / "noise.vlipq").string()));
    if (preview_dir && fs::exists(path / "trajectory.json") && fs::exists(path / "frames")) {
      const auto traj = trajectory_from_json(read_json_file((path / "trajectory.json").string()));
      fs::create_directories(*preview_dir / "boxes");
      for (int t = 0; t < traj.frame_count; ++t) {
        const auto frame = read_png((path / "frames" / frame_file_name(t)).string());
        write_png((*preview_dir / "boxes" / frame_file_name(t)).string(), draw_boxes(frame, traj, t));
      }
    }
    return out.str();
  }

  const auto bytes = read_file_bytes(path.string());
  switch (sniff(bytes)) {
    case ArtifactKind::flow: {
      const auto seq = decode_flow(bytes);
      if (preview_dir) write_flow_previews(seq, *preview_dir);
      return describe_flow(seq);
    }
    case ArtifactKind::noise:
      return describe_noise(decode_noise(bytes));
    case ArtifactKind::unknown:
      break;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error&) {
    throw format_error(path.string() + ": not a flow file, noise file or JSON artifact");
  }
  if (j.contains("checks")) {
    out << "physics " << j.at("overall").get<std::string>() << "\n";
    for (const auto& c : j.at("checks")) {
      out << "  " << c.at("status").get<std::string>() << "  " << c.at("name").get<std::string>() << "\n";
    }
    return out.str();
  }
  const bool interpolated = j.contains("frame_count");
  const auto tracks = interpolated ? trajectory_from_json(j).tracks : plan_from_json(j).tracks;
  out << (interpolated ? "trajectory " : "plan ") << j.at("law").get<std::string>() << "  " << j.at("width").get<int>()
      << " x " << j.at("height").get<int>() << "  " << tracks.size() << " tracks\n";
  for (const auto& t : tracks) {
    const auto& a = t.boxes.front();
    const auto& b = t.boxes.back();
    out << "  object " << t.object_id << " (" << t.label << ")  " << t.boxes.size() << " boxes  center ("
        << fmt("%.1f", a.center_x()) << ", " << fmt("%.1f", a.center_y()) << ") -> (" << fmt("%.1f", b.center_x())
        << ", " << fmt("%.1f", b.center_y()) << ")\n";
  }
  return out.str();
}

}  // namespace vlipp
