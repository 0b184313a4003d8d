#pragma once

// Binary artifact formats, all little-endian.
//
//   flow  (.vlipf): "VLIPF1\0\0", u32 count, u32 H, u32 W, then per field an
//                   H*W f32 dx plane followed by an H*W f32 dy plane.
//   noise (.vlipq): "VLIPQ1\0\0", u32 F, C, H, W, u64 seed, u64 seed2,
//                   32-byte flow hash, then F*C*H*W f32 in (f, c, h, w) order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "vlipp/error.hpp"
#include "vlipp/flow.hpp"
#include "vlipp/hash.hpp"
#include "vlipp/image_io.hpp"
#include "vlipp/noise.hpp"

namespace vlipp {

inline constexpr std::array<char, 8> flow_magic = {'V', 'L', 'I', 'P', 'F', '1', '\0', '\0'};
inline constexpr std::array<char, 8> noise_magic = {'V', 'L', 'I', 'P', 'Q', '1', '\0', '\0'};
inline constexpr std::size_t flow_header_size = 8 + 3 * 4;
inline constexpr std::size_t noise_header_size = 8 + 4 * 4 + 2 * 8 + 32;

enum class ArtifactKind { flow, noise, unknown };

inline ArtifactKind sniff(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) return ArtifactKind::unknown;
  if (std::memcmp(bytes.data(), flow_magic.data(), 8) == 0) return ArtifactKind::flow;
  if (std::memcmp(bytes.data(), noise_magic.data(), 8) == 0) return ArtifactKind::noise;
  return ArtifactKind::unknown;
}

namespace format_detail {

class Writer {
 public:
  explicit Writer(std::size_t reserve) { bytes_.reserve(reserve); }

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void floats(std::span<const float> v) {
    if constexpr (std::endian::native == std::endian::little) {
      raw(v.data(), v.size_bytes());
    } else {
      for (float f : v) le(std::bit_cast<std::uint32_t>(f));
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  void require_total(std::size_t expected) const {
    if (bytes_.size() < expected) {
      throw format_error(what_ + " is truncated: expected " + std::to_string(expected) + " bytes, got " +
                         std::to_string(bytes_.size()) + " (data ends at byte offset " +
                         std::to_string(bytes_.size()) + ")");
    }
    if (bytes_.size() > expected) {
      throw format_error(what_ + " has " + std::to_string(bytes_.size() - expected) +
                         " trailing bytes after offset " + std::to_string(expected));
    }
  }
  void need(std::size_t n) const {
    if (offset_ + n > bytes_.size()) {
      throw format_error(what_ + " is truncated: header needs " + std::to_string(offset_ + n) + " bytes, got " +
                         std::to_string(bytes_.size()) + " (at byte offset " + std::to_string(offset_) + ")");
    }
  }
  void magic(const std::array<char, 8>& m) {
    need(8);
    if (std::memcmp(bytes_.data(), m.data(), 8) != 0) throw format_error(what_ + ": bad magic bytes");
    offset_ += 8;
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{bytes_[offset_ + i]} << (8 * i));
    offset_ += sizeof(T);
    return v;
  }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + offset_, n);
    offset_ += n;
  }
  void floats(std::span<float> out) {
    need(out.size_bytes());
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), bytes_.data() + offset_, out.size_bytes());
      offset_ += out.size_bytes();
    } else {
      for (float& f : out) f = std::bit_cast<float>(le<std::uint32_t>());
    }
  }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string what_;
  std::size_t offset_ = 0;
};

}  // namespace format_detail

inline std::vector<std::uint8_t> encode_flow(const FlowSequence& seq) {
  const std::size_t plane = static_cast<std::size_t>(seq.height) * seq.width;
  format_detail::Writer w(flow_header_size + seq.fields.size() * plane * 8);
  w.raw(flow_magic.data(), 8);
  w.le(static_cast<std::uint32_t>(seq.fields.size()));
  w.le(static_cast<std::uint32_t>(seq.height));
  w.le(static_cast<std::uint32_t>(seq.width));
  for (const auto& f : seq.fields) {
    if (f.height() != seq.height || f.width() != seq.width) throw precondition_error("encode_flow: field dims mismatch");
    w.floats(f.dx.pixels());
    w.floats(f.dy.pixels());
  }
  return w.take();
}

inline FlowSequence decode_flow(std::span<const std::uint8_t> bytes) {
  format_detail::Reader r(bytes, "flow file");
  r.magic(flow_magic);
  const auto count = r.le<std::uint32_t>();
  const auto H = r.le<std::uint32_t>();
  const auto W = r.le<std::uint32_t>();
  const std::size_t plane = std::size_t{H} * W;
  r.require_total(flow_header_size + std::size_t{count} * plane * 8);
  FlowSequence seq{static_cast<int>(H), static_cast<int>(W), {}};
  seq.fields.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FlowField f = zero_flow(seq.height, seq.width);
    r.floats(f.dx.pixels());
    r.floats(f.dy.pixels());
    seq.fields.push_back(std::move(f));
  }
  return seq;
}

inline std::vector<std::uint8_t> encode_noise(const NoiseTensor& q) {
  format_detail::Writer w(noise_header_size + q.data.size() * 4);
  w.raw(noise_magic.data(), 8);
  w.le(static_cast<std::uint32_t>(q.frames));
  w.le(static_cast<std::uint32_t>(q.channels));
  w.le(static_cast<std::uint32_t>(q.height));
  w.le(static_cast<std::uint32_t>(q.width));
  w.le(q.seed);
  w.le(q.seed2);
  w.raw(q.flow_hash.data(), q.flow_hash.size());
  w.floats(q.data);
  return w.take();
}

inline NoiseTensor decode_noise(std::span<const std::uint8_t> bytes) {
  format_detail::Reader r(bytes, "noise file");
  r.magic(noise_magic);
  NoiseTensor q;
  q.frames = static_cast<int>(r.le<std::uint32_t>());
  q.channels = static_cast<int>(r.le<std::uint32_t>());
  q.height = static_cast<int>(r.le<std::uint32_t>());
  q.width = static_cast<int>(r.le<std::uint32_t>());
  q.seed = r.le<std::uint64_t>();
  q.seed2 = r.le<std::uint64_t>();
  r.raw(q.flow_hash.data(), q.flow_hash.size());
  const std::size_t count = std::size_t(q.frames) * q.channels * q.height * q.width;
  r.require_total(noise_header_size + count * 4);
  q.data.resize(count);
  r.floats(q.data);
  return q;
}

inline void write_flow_file(const std::string& path, const FlowSequence& seq) { write_bytes(path, encode_flow(seq)); }
inline FlowSequence read_flow_file(const std::string& path) { return decode_flow(read_file_bytes(path)); }
inline void write_noise_file(const std::string& path, const NoiseTensor& q) { write_bytes(path, encode_noise(q)); }
inline NoiseTensor read_noise_file(const std::string& path) { return decode_noise(read_file_bytes(path)); }

}  // namespace vlipp
