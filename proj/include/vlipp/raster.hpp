#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vlipp/error.hpp"

namespace vlipp {

// Dense row-major 2D grid with `Channels` interleaved samples per pixel.
template <typename T, int Channels = 1>
class Raster {
 public:
  using value_type = T;
  static constexpr int channels = Channels;

  Raster() = default;
  Raster(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * width * Channels, fill) {
    if (height < 0 || width < 0) throw precondition_error("raster dimensions must be nonnegative");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return data_.empty(); }
  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }

  T& at(int row, int col, int ch = 0) noexcept { return data_[index(row, col, ch)]; }
  const T& at(int row, int col, int ch = 0) const noexcept { return data_[index(row, col, ch)]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * Channels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using RgbImage = Raster<std::uint8_t, 3>;
using Mask = Raster<std::uint8_t, 1>;
using Plane = Raster<float, 1>;

// Round half away from zero; the single rounding rule used at every
// real-to-pixel boundary.
inline long round_half_away(double v) noexcept { return std::lround(v); }

inline std::uint8_t clamp_u8(double v) noexcept {
  const long r = round_half_away(v);
  return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

}  // namespace vlipp
