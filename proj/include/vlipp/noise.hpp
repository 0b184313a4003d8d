#pragma once

// Structured noise: Gaussian noise transported along the flow sequence so that
// it keeps unit-normal marginals while following the planned motion, plus the
// variance-preserving blend with fresh noise applied before handing it to the
// video model.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vlipp/error.hpp"
#include "vlipp/flow.hpp"
#include "vlipp/hash.hpp"
#include "vlipp/parallel.hpp"
#include "vlipp/random.hpp"

namespace vlipp {

struct InjectionSchedule {
  double gamma_even = 0.4;
  double gamma_odd = 0.6;

  double gamma(int frame) const noexcept { return frame % 2 == 0 ? gamma_even : gamma_odd; }
  bool valid() const noexcept { return gamma_even >= 0.0 && gamma_even <= 1.0 && gamma_odd >= 0.0 && gamma_odd <= 1.0; }
  bool operator==(const InjectionSchedule&) const = default;
};

// F x C x H x W, (f, c, h, w) row-major.
struct NoiseTensor {
  int frames = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
  std::uint64_t seed = 0;
  std::uint64_t seed2 = 0;  // 0 until injected
  Digest flow_hash{};       // hash of the flow file this tensor was warped from
  std::optional<InjectionSchedule> schedule;

  std::size_t frame_size() const noexcept { return static_cast<std::size_t>(channels) * height * width; }
  std::span<float> frame(int f) noexcept { return {data.data() + f * frame_size(), frame_size()}; }
  std::span<const float> frame(int f) const noexcept { return {data.data() + f * frame_size(), frame_size()}; }
  float& at(int f, int c, int h, int w) noexcept {
    return data[((static_cast<std::size_t>(f) * channels + c) * height + h) * width + w];
  }
  float at(int f, int c, int h, int w) const noexcept {
    return data[((static_cast<std::size_t>(f) * channels + c) * height + h) * width + w];
  }

  bool operator==(const NoiseTensor&) const = default;
};

struct NoiseDims {
  int channels = 3;
  int height = 0;
  int width = 0;
};

namespace noise_detail {

inline void fill_normal(std::span<float> out, std::uint64_t seed, NoiseStream stream, int frame, const NoiseDims& d) {
  for (int c = 0; c < d.channels; ++c) {
    for (int h = 0; h < d.height; ++h) {
      for (int w = 0; w < d.width; ++w) {
        out[(static_cast<std::size_t>(c) * d.height + h) * d.width + w] = static_cast<float>(standard_normal(
            {seed, stream, static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(c),
             static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)}));
      }
    }
  }
}

}  // namespace noise_detail

// One transport step. Every source pixel of `prev` moves to the rounded
// position of its flow target; each target receives the sum of its k
// contributors (in row-major source order) divided by sqrt(k). Targets nobody
// reaches take fresh(c, h, w); contributions leaving the image are dropped.
// The same mapping is applied to every channel.
inline std::vector<float> warp_step(std::span<const float> prev, const FlowField& flow, const NoiseDims& d,
                                    const std::function<float(int, int, int)>& fresh) {
  const int H = d.height;
  const int W = d.width;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  if (flow.height() != H || flow.width() != W) throw precondition_error("warp_noise: flow dims mismatch");
  if (prev.size() != plane * d.channels) throw precondition_error("warp_noise: frame size mismatch");

  std::vector<std::int64_t> target(plane, -1);
  std::vector<std::uint32_t> count(plane, 0);
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      const long th = round_half_away(h + static_cast<double>(flow.dy.at(h, w)));
      const long tw = round_half_away(w + static_cast<double>(flow.dx.at(h, w)));
      if (th < 0 || th >= H || tw < 0 || tw >= W) continue;
      const std::int64_t t = static_cast<std::int64_t>(th) * W + tw;
      target[static_cast<std::size_t>(h) * W + w] = t;
      ++count[static_cast<std::size_t>(t)];
    }
  }

  std::vector<float> out(prev.size());
  std::vector<double> acc(plane);
  for (int c = 0; c < d.channels; ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const float* src = prev.data() + c * plane;
    for (std::size_t s = 0; s < plane; ++s) {
      if (target[s] >= 0) acc[static_cast<std::size_t>(target[s])] += src[s];
    }
    float* dst = out.data() + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      if (count[p] == 0) {
        dst[p] = fresh(c, static_cast<int>(p / W), static_cast<int>(p % W));
      } else if (count[p] == 1) {
        dst[p] = static_cast<float>(acc[p]);
      } else {
        dst[p] = static_cast<float>(acc[p] / std::sqrt(static_cast<double>(count[p])));
      }
    }
  }
  return out;
}

inline NoiseTensor warp_noise(const FlowSequence& flows, const NoiseDims& dims, std::uint64_t seed,
                              const Digest& flow_hash = {}) {
  if (flows.height != dims.height || flows.width != dims.width) throw precondition_error("warp_noise: flow dims mismatch");
  NoiseTensor q;
  q.frames = static_cast<int>(flows.fields.size()) + 1;
  q.channels = dims.channels;
  q.height = dims.height;
  q.width = dims.width;
  q.seed = seed;
  q.flow_hash = flow_hash;
  q.data.resize(q.frame_size() * q.frames);

  noise_detail::fill_normal(q.frame(0), seed, NoiseStream::structured, 0, dims);
  for (int t = 1; t < q.frames; ++t) {
    auto fresh = [&](int c, int h, int w) {
      return static_cast<float>(standard_normal({seed, NoiseStream::structured, static_cast<std::uint32_t>(t),
                                                 static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(h),
                                                 static_cast<std::uint32_t>(w)}));
    };
    auto next = warp_step(q.frame(t - 1), flows.fields[t - 1], dims, fresh);
    std::copy(next.begin(), next.end(), q.frame(t).begin());
  }
  return q;
}

// out_i = ((1 - g) q_i + g z_i) / sqrt((1 - g)^2 + g^2), g chosen by frame
// parity, z fresh standard normal noise keyed by seed2.
inline NoiseTensor inject(NoiseTensor q, const InjectionSchedule& schedule, std::uint64_t seed2, int threads = 1) {
  if (!schedule.valid()) throw precondition_error("inject: gamma must lie in [0, 1]");
  const NoiseDims dims{q.channels, q.height, q.width};
  parallel_for(q.frames, threads, [&](int f) {
    const double g = schedule.gamma(f);
    const double keep = 1.0 - g;
    const double norm = std::sqrt(keep * keep + g * g);
    auto frame = q.frame(f);
    std::size_t i = 0;
    for (int c = 0; c < dims.channels; ++c) {
      for (int h = 0; h < dims.height; ++h) {
        for (int w = 0; w < dims.width; ++w, ++i) {
          const double z = static_cast<float>(standard_normal({seed2, NoiseStream::injection,
                                                               static_cast<std::uint32_t>(f),
                                                               static_cast<std::uint32_t>(c),
                                                               static_cast<std::uint32_t>(h),
                                                               static_cast<std::uint32_t>(w)}));
          frame[i] = static_cast<float>((keep * frame[i] + g * z) / norm);
        }
      }
    }
  });
  q.seed2 = seed2;
  q.schedule = schedule;
  return q;
}

// The no-planner baseline: iid standard normal noise with no flow behind it.
inline NoiseTensor degrade_to_random(const NoiseDims& dims, int frames, std::uint64_t seed, int threads = 1) {
  NoiseTensor q;
  q.frames = frames;
  q.channels = dims.channels;
  q.height = dims.height;
  q.width = dims.width;
  q.seed = seed;
  q.data.resize(q.frame_size() * frames);
  parallel_for(frames, threads,
               [&](int f) { noise_detail::fill_normal(q.frame(f), seed, NoiseStream::structured, f, dims); });
  return q;
}

struct MomentStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

inline MomentStats moments(std::span<const float> v) {
  if (v.empty()) return {};
  double sum = 0.0;
  for (float x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double acc = 0.0;
  for (float x : v) acc += (x - mean) * (x - mean);
  return {mean, acc / static_cast<double>(v.size())};
}

inline double pearson(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) throw precondition_error("pearson: size mismatch");
  const auto ma = moments(a);
  const auto mb = moments(b);
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
  cov /= static_cast<double>(a.size());
  const double denom = std::sqrt(ma.variance * mb.variance);
  return denom == 0.0 ? 0.0 : cov / denom;
}

// Mean Pearson correlation over consecutive frame pairs.
inline double mean_interframe_correlation(const NoiseTensor& q) {
  if (q.frames < 2) return 0.0;
  double sum = 0.0;
  for (int f = 0; f + 1 < q.frames; ++f) sum += pearson(q.frame(f), q.frame(f + 1));
  return sum / (q.frames - 1);
}

}  // namespace vlipp
