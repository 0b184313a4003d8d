#pragma once

// Synthetic motion video: every object's frame-0 crop is resized to its box
// at frame t and composited over an inpainted background.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "vlipp/error.hpp"
#include "vlipp/parallel.hpp"
#include "vlipp/raster.hpp"
#include "vlipp/scene.hpp"

namespace vlipp {

struct Background {
  RgbImage image;
};

struct SyntheticVideo {
  std::vector<RgbImage> frames;
};

// Fills the union of object masks by repeated 8-neighbour averaging from the
// hole boundary inward, then box-blurs (3x3) the filled pixels only.
inline Background inpaint_background(const InputScene& scene) {
  const int H = scene.height();
  const int W = scene.width();
  std::vector<std::uint8_t> hole(static_cast<std::size_t>(H) * W, 0);
  for (const auto& o : scene.objects) {
    if (o.mask.height() != H || o.mask.width() != W) {
      throw precondition_error("inpaint_background: mask extent differs from image");
    }
    for (std::size_t i = 0; i < hole.size(); ++i) hole[i] |= o.mask.storage()[i] ? 1 : 0;
  }
  if (std::all_of(hole.begin(), hole.end(), [](auto v) { return v != 0; })) {
    throw precondition_error("inpaint_background: no background pixels");
  }

  Raster<double, 3> work(H, W);
  for (std::size_t i = 0; i < work.storage().size(); ++i) work.storage()[i] = scene.image.storage()[i];

  std::vector<std::uint8_t> known(hole.size());
  std::vector<int> pending;
  for (std::size_t i = 0; i < hole.size(); ++i) {
    known[i] = hole[i] ? 0 : 1;
    if (hole[i]) pending.push_back(static_cast<int>(i));
  }

  struct Fill {
    int index;
    double rgb[3];
  };
  std::vector<Fill> ring;
  std::vector<int> still_pending;
  while (!pending.empty()) {
    ring.clear();
    still_pending.clear();
    for (int idx : pending) {
      const int r = idx / W;
      const int c = idx % W;
      double sum[3] = {0, 0, 0};
      int n = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || !work.contains(r + dr, c + dc)) continue;
          if (!known[static_cast<std::size_t>(r + dr) * W + (c + dc)]) continue;
          for (int ch = 0; ch < 3; ++ch) sum[ch] += work.at(r + dr, c + dc, ch);
          ++n;
        }
      }
      if (n == 0) {
        still_pending.push_back(idx);
        continue;
      }
      ring.push_back({idx, {sum[0] / n, sum[1] / n, sum[2] / n}});
    }
    for (const auto& f : ring) {
      for (int ch = 0; ch < 3; ++ch) work.at(f.index / W, f.index % W, ch) = f.rgb[ch];
      known[f.index] = 1;
    }
    pending.swap(still_pending);
  }

  Background bg{scene.image};
  for (std::size_t idx = 0; idx < hole.size(); ++idx) {
    if (!hole[idx]) continue;
    const int r = static_cast<int>(idx) / W;
    const int c = static_cast<int>(idx) % W;
    double sum[3] = {0, 0, 0};
    int n = 0;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (!work.contains(r + dr, c + dc)) continue;
        for (int ch = 0; ch < 3; ++ch) sum[ch] += work.at(r + dr, c + dc, ch);
        ++n;
      }
    }
    for (int ch = 0; ch < 3; ++ch) bg.image.at(r, c, ch) = clamp_u8(sum[ch] / n);
  }
  return bg;
}

// Corner-aligned bilinear resampling: output sample i maps to source
// coordinate i * (src - 1) / (dst - 1), so corners map to corners and a
// same-size resize is the identity.
template <typename T, int C>
Raster<double, C> resize_bilinear(const Raster<T, C>& src, int out_h, int out_w) {
  if (src.empty()) throw precondition_error("resize_bilinear: empty source");
  Raster<double, C> out(out_h, out_w);
  auto coord = [](int i, int src_n, int dst_n) {
    if (dst_n == 1) return 0.5 * (src_n - 1);
    return static_cast<double>(i) * (src_n - 1) / (dst_n - 1);
  };
  for (int r = 0; r < out_h; ++r) {
    const double sy = coord(r, src.height(), out_h);
    const int y0 = std::min(static_cast<int>(std::floor(sy)), src.height() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = sy - y0;
    for (int c = 0; c < out_w; ++c) {
      const double sx = coord(c, src.width(), out_w);
      const int x0 = std::min(static_cast<int>(std::floor(sx)), src.width() - 1);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double fx = sx - x0;
      for (int ch = 0; ch < C; ++ch) {
        const double top = src.at(y0, x0, ch) + (fx == 0.0 ? 0.0 : fx * (src.at(y0, x1, ch) - src.at(y0, x0, ch)));
        const double bot = src.at(y1, x0, ch) + (fx == 0.0 ? 0.0 : fx * (src.at(y1, x1, ch) - src.at(y1, x0, ch)));
        out.at(r, c, ch) = top + (fy == 0.0 ? 0.0 : fy * (bot - top));
      }
    }
  }
  return out;
}

// Frame-0 appearance of one object: its box crop and the matching mask.
struct Sprite {
  int object_id = 0;
  BoundingBox init_box;
  RgbImage pixels;
  Raster<std::uint8_t, 1> alpha;  // 0/1
};

inline Sprite extract_sprite(const InputScene& scene, const SceneObject& obj) {
  const PixelRect r = rasterize(obj.init_box);
  Sprite s{obj.id, obj.init_box, RgbImage(static_cast<int>(r.height), static_cast<int>(r.width)),
           Raster<std::uint8_t, 1>(static_cast<int>(r.height), static_cast<int>(r.width))};
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const long iy = r.top + y;
      const long ix = r.left + x;
      if (!scene.image.contains(static_cast<int>(iy), static_cast<int>(ix))) continue;
      for (int ch = 0; ch < 3; ++ch) s.pixels.at(y, x, ch) = scene.image.at(static_cast<int>(iy), static_cast<int>(ix), ch);
      s.alpha.at(y, x) = obj.mask.at(static_cast<int>(iy), static_cast<int>(ix)) ? 1 : 0;
    }
  }
  return s;
}

// Objects in draw order: ascending id unless `order` lists ids explicitly
// (unlisted objects follow in ascending id).
inline std::vector<const SceneObject*> draw_order(const InputScene& scene, const std::vector<int>& order = {}) {
  std::vector<const SceneObject*> out;
  for (int id : order) {
    if (const auto* o = scene.find(id); o && std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
  }
  std::vector<const SceneObject*> rest;
  for (const auto& o : scene.objects) {
    if (std::find(out.begin(), out.end(), &o) == out.end()) rest.push_back(&o);
  }
  std::sort(rest.begin(), rest.end(), [](auto* a, auto* b) { return a->id < b->id; });
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// Box of an object at frame t; objects without a track stay at their
// initial box.
template <typename Trajectory>
BoundingBox box_at(const Trajectory& traj, const SceneObject& obj, int t) {
  const Track* track = traj.find(obj.id);
  if (track == nullptr) return obj.init_box;
  return track->boxes.at(static_cast<std::size_t>(t));
}

struct RenderOptions {
  std::vector<int> draw_order;  // empty: ascending id
  int threads = 1;
};

class Animator {
 public:
  Animator(const Background& bg, const InputScene& scene, const InterpolatedTrajectory& traj,
           RenderOptions options = {})
      : bg_(bg), traj_(traj), options_(std::move(options)) {
    if (bg.image.height() != scene.height() || bg.image.width() != scene.width()) {
      throw precondition_error("render: background size differs from scene");
    }
    for (const auto* obj : draw_order(scene, options_.draw_order)) {
      sprites_.push_back(extract_sprite(scene, *obj));
      objects_.push_back(obj);
    }
  }

  RgbImage frame(int t) const {
    if (t < 0 || t >= traj_.frame_count) throw precondition_error("render_frame: frame index out of range");
    RgbImage out = bg_.image;
    for (std::size_t i = 0; i < sprites_.size(); ++i) {
      composite(out, sprites_[i], box_at(traj_, *objects_[i], t));
    }
    return out;
  }

  SyntheticVideo video() const {
    SyntheticVideo v;
    v.frames.resize(static_cast<std::size_t>(traj_.frame_count));
    parallel_for(traj_.frame_count, options_.threads, [&](int t) { v.frames[t] = frame(t); });
    return v;
  }

 private:
  static void composite(RgbImage& out, const Sprite& sprite, const BoundingBox& box) {
    const PixelRect r = rasterize(box);
    if (r.left >= out.width() || r.top >= out.height() || r.left + r.width <= 0 || r.top + r.height <= 0) return;
    const int th = static_cast<int>(r.height);
    const int tw = static_cast<int>(r.width);
    const auto rgb = resize_bilinear(sprite.pixels, th, tw);
    const auto alpha = resize_bilinear(sprite.alpha, th, tw);
    for (int y = 0; y < th; ++y) {
      const long oy = r.top + y;
      if (oy < 0 || oy >= out.height()) continue;
      for (int x = 0; x < tw; ++x) {
        const long ox = r.left + x;
        if (ox < 0 || ox >= out.width()) continue;
        const double a = alpha.at(y, x);
        if (a <= 0.0) continue;
        for (int ch = 0; ch < 3; ++ch) {
          auto& dst = out.at(static_cast<int>(oy), static_cast<int>(ox), ch);
          dst = clamp_u8(a >= 1.0 ? rgb.at(y, x, ch) : a * rgb.at(y, x, ch) + (1.0 - a) * dst);
        }
      }
    }
  }

  const Background& bg_;
  const InterpolatedTrajectory& traj_;
  RenderOptions options_;
  std::vector<Sprite> sprites_;
  std::vector<const SceneObject*> objects_;
};

inline RgbImage render_frame(const Background& bg, const InputScene& scene, const InterpolatedTrajectory& traj, int t,
                             const RenderOptions& options = {}) {
  return Animator(bg, scene, traj, options).frame(t);
}

inline SyntheticVideo render_video(const Background& bg, const InputScene& scene, const InterpolatedTrajectory& traj,
                                   const RenderOptions& options = {}) {
  return Animator(bg, scene, traj, options).video();
}

}  // namespace vlipp
