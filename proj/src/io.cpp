#include "monster/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include <png.h>

#include "monster/image.hpp"

namespace monster {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& file, const char* mode) {
  FilePtr f(std::fopen(file.c_str(), mode));
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  return f;
}

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // after stripping alpha
  int bit_depth = 8;
  std::vector<uint16_t> samples;
};

RawPng read_raw_png(const std::filesystem::path& file) {
  FilePtr f = open_file(file, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }
  RawPng raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "corrupt PNG: " + file.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buf(rowbytes * raw.height);
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buf.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const size_t n = static_cast<size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  if (raw.bit_depth == 16) {
    std::memcpy(raw.samples.data(), buf.data(), n * 2);
  } else {
    for (size_t i = 0; i < n; ++i) raw.samples[i] = buf[i];
  }
  return raw;
}

void write_raw_png(const std::filesystem::path& file, int width, int height, int channels,
                   int bit_depth, const std::vector<uint16_t>& samples) {
  FilePtr f = open_file(file, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "PNG write failed: " + file.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  const size_t per_row = static_cast<size_t>(width) * channels;
  std::vector<png_byte> row(per_row * (bit_depth / 8));
  for (int y = 0; y < height; ++y) {
    const uint16_t* src = samples.data() + per_row * y;
    if (bit_depth == 16) {
      std::memcpy(row.data(), src, per_row * 2);
    } else {
      for (size_t i = 0; i < per_row; ++i) row[i] = static_cast<png_byte>(src[i]);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_png(const std::filesystem::path& file) {
  const RawPng raw = read_raw_png(file);
  if (raw.channels != 1 && raw.channels != 3) {
    throw Error(ErrorCode::IoError, "unsupported PNG channel count in " + file.string());
  }
  Image img(raw.width, raw.height, raw.channels);
  const double scale = raw.bit_depth == 16 ? 65535.0 : 255.0;
  for (size_t i = 0; i < raw.samples.size(); ++i) img.samples[i] = raw.samples[i] / scale;
  return img;
}

void write_png(const std::filesystem::path& file, const Image& img, PngDepth depth) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorCode::IoError, "PNG output needs 1 or 3 channels");
  }
  const double scale = depth == PngDepth::Bits16 ? 65535.0 : 255.0;
  std::vector<uint16_t> q(img.samples.size());
  for (size_t i = 0; i < q.size(); ++i) {
    const double v = std::clamp(img.samples[i], 0.0, 1.0);
    q[i] = static_cast<uint16_t>(std::lround(v * scale));
  }
  write_raw_png(file, img.width, img.height, img.channels, static_cast<int>(depth), q);
}

void write_mask_png(const std::filesystem::path& file, const Grid<uint8_t>& mask) {
  std::vector<uint16_t> q(mask.size());
  for (size_t i = 0; i < q.size(); ++i) q[i] = mask.data()[i] ? 255 : 0;
  write_raw_png(file, mask.width(), mask.height(), 1, 8, q);
}

Grid<uint8_t> read_mask_png(const std::filesystem::path& file) {
  Grid<uint8_t> labels = read_label_png(file);
  for (auto& v : labels.data()) v = v >= 128 ? 1 : 0;
  return labels;
}

void write_label_png(const std::filesystem::path& file, const Grid<uint8_t>& labels) {
  std::vector<uint16_t> q(labels.data().begin(), labels.data().end());
  write_raw_png(file, labels.width(), labels.height(), 1, 8, q);
}

Grid<uint8_t> read_label_png(const std::filesystem::path& file) {
  const RawPng raw = read_raw_png(file);
  if (raw.channels != 1 || raw.bit_depth != 8) {
    throw Error(ErrorCode::IoError, "expected 8-bit grayscale PNG: " + file.string());
  }
  Grid<uint8_t> out(raw.width, raw.height);
  for (size_t i = 0; i < raw.samples.size(); ++i) out.data()[i] = static_cast<uint8_t>(raw.samples[i]);
  return out;
}

template <typename Tag>
void write_pfm(const std::filesystem::path& file, const MaskedMap<Tag>& map) {
  static_assert(sizeof(float) == 4);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  out << "Pf\n" << map.width() << " " << map.height() << "\n-1.0\n";
  std::vector<uint8_t> row(static_cast<size_t>(map.width()) * 4);
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      const float v = map.valid(x, y) ? static_cast<float>(map.value(x, y))
                                      : std::numeric_limits<float>::quiet_NaN();
      uint32_t bits = std::bit_cast<uint32_t>(v);
      for (int b = 0; b < 4; ++b) row[x * 4 + b] = static_cast<uint8_t>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + file.string());
}

template <typename Tag>
MaskedMap<Tag> read_pfm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (magic != "Pf" || w <= 0 || h <= 0 || scale == 0.0) {
    throw Error(ErrorCode::IoError, "not a grayscale PFM: " + file.string());
  }
  in.get();  // single whitespace before the raster
  const bool little = scale < 0.0;
  MaskedMap<Tag> map(w, h, 0.0, false);
  std::vector<uint8_t> row(static_cast<size_t>(w) * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw Error(ErrorCode::IoError, "truncated PFM: " + file.string());
    for (int x = 0; x < w; ++x) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<uint32_t>(row[x * 4 + b]) << shift;
      }
      const float v = std::bit_cast<float>(bits);
      if (std::isfinite(v)) map.set(x, y, v);
    }
  }
  return map;
}

template void write_pfm(const std::filesystem::path&, const MaskedMap<DepthTag>&);
template void write_pfm(const std::filesystem::path&, const MaskedMap<DisparityTag>&);
template MaskedMap<DepthTag> read_pfm(const std::filesystem::path&);
template MaskedMap<DisparityTag> read_pfm(const std::filesystem::path&);

}  // namespace monster
