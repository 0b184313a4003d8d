#pragma once

// Scene files and the synthetic demo scenes.
//
// scene.json:
//   {"image": "first_frame.png", "description": "...",
//    "objects": [{"id": 0, "label": "ball", "box": {"x":..,"y":..,"w":..,"h":..},
//                 "mask": "mask_0.png"}]}
//
// Paths are relative to the scene file. A missing mask means the whole box.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "vlipp/animator.hpp"
#include "vlipp/error.hpp"
#include "vlipp/image_io.hpp"
#include "vlipp/scene.hpp"

namespace vlipp {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << text;
  if (!out) throw io_error("short write to " + path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline InputScene load_scene(const std::string& path) {
  namespace fs = std::filesystem;
  const nlohmann::json j = read_json_file(path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    InputScene scene;
    scene.image = read_png(resolve(j.at("image").get<std::string>()).string());
    scene.description = j.value("description", std::string{});
    for (const auto& o : j.at("objects")) {
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      obj.label = o.value("label", "object" + std::to_string(obj.id));
      const auto& b = o.at("box");
      obj.init_box = {b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()};
      if (o.contains("mask") && o["mask"].is_string()) {
        obj.mask = read_mask_png(resolve(o["mask"].get<std::string>()).string());
        if (obj.mask.height() != scene.height() || obj.mask.width() != scene.width()) {
          throw format_error(path + ": mask of object " + std::to_string(obj.id) + " differs in size from the image");
        }
      } else {
        obj.mask = box_mask(scene.height(), scene.width(), obj.init_box);
      }
      scene.objects.push_back(std::move(obj));
    }
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": " + e.what());
  }
}

inline RgbImage mask_image(const Mask& m) {
  RgbImage img(m.height(), m.width());
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const std::uint8_t v = m.at(r, c) ? 255 : 0;
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = v;
    }
  }
  return img;
}

// Writes image, masks and scene.json into dir.
inline void save_scene(const InputScene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    const std::string mask_name = "mask_" + std::to_string(o.id) + ".png";
    write_png((fs::path(dir) / mask_name).string(), mask_image(o.mask));
    objects.push_back({{"id", o.id},
                       {"label", o.label},
                       {"box", {{"x", o.init_box.x}, {"y", o.init_box.y}, {"w", o.init_box.w}, {"h", o.init_box.h}}},
                       {"mask", mask_name}});
  }
  write_png((fs::path(dir) / "first_frame.png").string(), scene.image);
  write_json_file((fs::path(dir) / "scene.json").string(),
                  {{"image", "first_frame.png"}, {"description", scene.description}, {"objects", objects}});
}

// Resamples the scene to width x height: bilinear image, nearest-neighbour
// masks, boxes scaled with the image.
inline InputScene fit_scene(const InputScene& scene, int width, int height) {
  if (scene.width() == width && scene.height() == height) return scene;
  InputScene out;
  out.description = scene.description;
  const auto rgb = resize_bilinear(scene.image, height, width);
  out.image = RgbImage(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.image.at(r, c, ch) = clamp_u8(rgb.at(r, c, ch));
    }
  }
  const double sx = static_cast<double>(width) / scene.width();
  const double sy = static_cast<double>(height) / scene.height();
  for (const auto& o : scene.objects) {
    SceneObject obj{o.id, o.label, {o.init_box.x * sx, o.init_box.y * sy, o.init_box.w * sx, o.init_box.h * sy}, Mask(height, width, 0)};
    for (int r = 0; r < height; ++r) {
      const int sr = std::min(scene.height() - 1, static_cast<int>((r + 0.5) / sy));
      for (int c = 0; c < width; ++c) {
        const int sc = std::min(scene.width() - 1, static_cast<int>((c + 0.5) / sx));
        obj.mask.at(r, c) = o.mask.at(sr, sc);
      }
    }
    out.objects.push_back(std::move(obj));
  }
  return out;
}

namespace demo_detail {

inline std::uint32_t hash2(std::uint32_t x, std::uint32_t y) {
  std::uint32_t h = x * 0x8da6b343u ^ y * 0xd8163841u;
  h ^= h >> 15;
  h *= 0x2c1b3c6du;
  h ^= h >> 12;
  return h;
}

// Sky above a textured floor; the speckle gives block matching something to lock on to.
inline RgbImage backdrop(int height, int width, int floor_row) {
  RgbImage img(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int speck = static_cast<int>(hash2(c / 4, r / 4) % 41) - 20;
      if (r < floor_row) {
        const double t = static_cast<double>(r) / std::max(1, floor_row);
        img.at(r, c, 0) = clamp_u8(120 + 60 * t + speck);
        img.at(r, c, 1) = clamp_u8(170 + 40 * t + speck);
        img.at(r, c, 2) = clamp_u8(230 - 20 * t + speck);
      } else {
        const bool plank = ((c / 48) + (r / 16)) % 2 == 0;
        img.at(r, c, 0) = clamp_u8((plank ? 150 : 130) + speck);
        img.at(r, c, 1) = clamp_u8((plank ? 105 : 90) + speck);
        img.at(r, c, 2) = clamp_u8((plank ? 70 : 60) + speck);
      }
    }
  }
  return img;
}

inline void paint_ball(InputScene& scene, int id, const std::string& label, const BoundingBox& box,
                       const std::array<int, 3>& base) {
  SceneObject obj{id, label, box, Mask(scene.height(), scene.width(), 0)};
  const double cx = box.center_x();
  const double cy = box.center_y();
  const double rad = 0.5 * std::min(box.w, box.h);
  for (int r = 0; r < scene.height(); ++r) {
    for (int c = 0; c < scene.width(); ++c) {
      const double dx = c + 0.5 - cx;
      const double dy = r + 0.5 - cy;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > rad - 0.5) continue;
      obj.mask.at(r, c) = 1;
      const double shade = 1.0 - 0.45 * d / rad;
      const bool stripe = static_cast<int>(std::floor((dx + dy) / 7.0)) % 2 == 0;
      for (int ch = 0; ch < 3; ++ch) {
        scene.image.at(r, c, ch) = clamp_u8(base[ch] * shade * (stripe ? 1.0 : 0.7));
      }
    }
  }
  scene.objects.push_back(std::move(obj));
}

}  // namespace demo_detail

enum class DemoKind { gravity, momentum };

// Demo scenes sized width x height. The matching mock settings are returned
// as config text so the run can be reproduced from the scene directory alone.
struct DemoScene {
  InputScene scene;
  std::string config_text;
};

inline DemoScene make_demo_scene(DemoKind kind, int width = 720, int height = 480) {
  if (width < 160 || height < 120) throw precondition_error("demo scene needs at least 160 x 120 pixels");
  DemoScene d;
  const int floor_row = height * 5 / 6;
  d.scene.image = demo_detail::backdrop(height, width, floor_row);
  const double s = std::round(height / 8.0);
  if (kind == DemoKind::gravity) {
    d.scene.description = "A rubber ball is dropped and falls onto the wooden floor.";
    demo_detail::paint_ball(d.scene, 0, "ball", {std::round(width / 2.0 - s / 2), std::round(height / 12.0), s, s},
                            {225, 60, 50});
    d.config_text = "law = \"gravity\"\nmock = true\n\n[mock]\ng = " + std::to_string(std::round(height / 60.0)) +
                    "\nrestitution = 0.5\nfloor_y = " + std::to_string(floor_row + s / 4) + "\n";
  } else {
    d.scene.description = "A red ball rolls to the right and hits a resting blue ball of equal mass.";
    const double y = floor_row - s;
    demo_detail::paint_ball(d.scene, 0, "red ball", {std::round(width / 8.0), y, s, s}, {225, 60, 50});
    demo_detail::paint_ball(d.scene, 1, "blue ball", {std::round(width / 2.0), y, s, s}, {50, 90, 225});
    d.config_text = "law = \"momentum_conservation\"\nmock = true\n\n[mock]\nvelocity.0 = " +
                    std::to_string(std::round(width / 24.0)) + "\nvelocity.1 = 0\n\n[masses]\n0 = 1.0\n1 = 1.0\n";
  }
  return d;
}

}  // namespace vlipp
