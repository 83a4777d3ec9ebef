#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monster/error.hpp"

namespace monster {

/// Dense row-major 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  size_t index(int x, int y) const noexcept { return static_cast<size_t>(y) * width_ + x; }

  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {data_.data() + index(0, y), static_cast<size_t>(width_)};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Intensity image with 1 or 3 channels in [0,1] and a per-pixel validity flag.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> samples;  // interleaved, row-major
  std::vector<uint8_t> valid;   // one flag per pixel

  Image() = default;
  Image(int w, int h, int c = 1, double fill = 0.0)
      : width(w), height(h), channels(c),
        samples(static_cast<size_t>(w) * h * c, fill),
        valid(static_cast<size_t>(w) * h, 1) {}

  size_t pixel_index(int x, int y) const noexcept { return static_cast<size_t>(y) * width + x; }
  double& at(int x, int y, int c = 0) { return samples[pixel_index(x, y) * channels + c]; }
  double at(int x, int y, int c = 0) const { return samples[pixel_index(x, y) * channels + c]; }
  bool is_valid(int x, int y) const { return valid[pixel_index(x, y)] != 0; }

  bool operator==(const Image&) const = default;
};

Grid<uint8_t> validity_of(const Image& img);
/// Throws DimensionMismatch when sizes differ.
void set_validity(Image& img, const Grid<uint8_t>& mask);

/// Window [x0, x0+w) x [y0, y0+h); throws InvalidRange unless it lies inside.
Image crop(const Image& img, int x0, int y0, int w, int h);

/// Luminance (0.299, 0.587, 0.114) for RGB; copy for grayscale.
Image to_gray(const Image& img);

/// Scalar field with validity mask. The tag keeps depth, disparity and
/// confidence maps from being mixed up.
template <typename Tag>
class MaskedMap {
 public:
  MaskedMap() = default;
  MaskedMap(int width, int height, double fill = 0.0, bool valid = true)
      : values_(width, height, fill), valid_(width, height, valid ? 1 : 0) {}

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  size_t size() const noexcept { return values_.size(); }

  double value(int x, int y) const { return values_(x, y); }
  bool valid(int x, int y) const { return valid_(x, y) != 0; }

  void set(int x, int y, double v) {
    values_(x, y) = v;
    valid_(x, y) = 1;
  }
  void invalidate(int x, int y) { valid_(x, y) = 0; }

  Grid<double>& values() noexcept { return values_; }
  const Grid<double>& values() const noexcept { return values_; }
  Grid<uint8_t>& mask() noexcept { return valid_; }
  const Grid<uint8_t>& mask() const noexcept { return valid_; }

  size_t count_valid() const {
    size_t n = 0;
    for (uint8_t v : valid_.data()) n += v != 0;
    return n;
  }

  bool same_shape(int w, int h) const { return width() == w && height() == h; }
  template <typename Other>
  bool same_shape(const Other& o) const {
    return width() == o.width() && height() == o.height();
  }

  bool operator==(const MaskedMap&) const = default;

 private:
  Grid<double> values_;
  Grid<uint8_t> valid_;
};

struct DepthTag {};
struct DisparityTag {};

/// Metric depth in meters.
using DepthMap = MaskedMap<DepthTag>;
/// Horizontal disparity in pixels.
using DisparityMap = MaskedMap<DisparityTag>;

/// Per-pixel confidence in [0,1].
class ConfidenceMap : public Grid<double> {
 public:
  using Grid<double>::Grid;
};

template <typename Tag>
MaskedMap<Tag> crop(const MaskedMap<Tag>& m, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > m.width() || y0 + h > m.height()) {
    throw Error(ErrorCode::InvalidRange, "crop window outside the map");
  }
  MaskedMap<Tag> out(w, h, 0.0, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.values()(x, y) = m.value(x0 + x, y0 + y);
      out.mask()(x, y) = m.mask()(x0 + x, y0 + y);
    }
  }
  return out;
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, what);
  }
}

}  // namespace monster
