#pragma once

// PNG and raw-plane I/O for RGB rasters (libpng).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "vlipp/error.hpp"
#include "vlipp/raster.hpp"

namespace vlipp {

namespace png_detail {

struct WriteSink {
  std::vector<std::uint8_t>* out;
};

inline void write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

inline void flush_noop(png_structp) {}

struct ReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

inline void read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
  if (src->offset + len > src->size) png_error(png, "truncated PNG stream");
  std::copy(src->data + src->offset, src->data + src->offset + len, out);
  src->offset += len;
}

}  // namespace png_detail

// Deterministic encoding: fixed compression level and no time chunk.
inline std::vector<std::uint8_t> encode_png(const RgbImage& img, int compression = 6) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw io_error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("png: encode failed");
  }
  png_detail::WriteSink sink{&out};
  png_set_write_fn(png, &sink, png_detail::write_to_vector, png_detail::flush_noop);
  png_set_compression_level(png, compression);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto* base = img.pixels().data();
  for (int r = 0; r < img.height(); ++r) {
    png_write_row(png, const_cast<png_bytep>(base + static_cast<std::size_t>(r) * img.width() * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// Decodes any PNG into 8-bit RGB (alpha dropped, gray expanded, 16-bit stripped).
inline RgbImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw format_error("png: bad signature");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw io_error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  RgbImage img;
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("png: decode failed");
  }
  png_detail::ReadSource src{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &src, png_detail::read_from_memory);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("png: unsupported pixel layout");
  }
  img = RgbImage(h, w);
  auto* base = img.pixels().data();
  for (int r = 0; r < h; ++r) png_read_row(png, base + static_cast<std::size_t>(r) * w * 3, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path);
}

inline void write_png(const std::string& path, const RgbImage& img) { write_bytes(path, encode_png(img)); }

inline RgbImage read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_png(bytes);
}

// Binary mask from a PNG: any nonzero channel marks foreground.
inline Mask read_mask_png(const std::string& path) {
  const RgbImage img = read_png(path);
  Mask m(img.height(), img.width(), 0);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      m.at(r, c) = (img.at(r, c, 0) | img.at(r, c, 1) | img.at(r, c, 2)) ? 1 : 0;
    }
  }
  return m;
}

// H x W x 3 u8, row-major, no header.
inline void write_raw(const std::string& path, const RgbImage& img) {
  write_bytes(path, img.storage());
}

}  // namespace vlipp
