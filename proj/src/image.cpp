#include "monster/image.hpp"

namespace monster {

Grid<uint8_t> validity_of(const Image& img) {
  Grid<uint8_t> g(img.width, img.height);
  g.data() = img.valid;
  return g;
}

Image crop(const Image& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width || y0 + h > img.height) {
    throw Error(ErrorCode::InvalidRange, "crop window outside the image");
  }
  Image out(w, h, img.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
      out.valid[out.pixel_index(x, y)] = img.valid[img.pixel_index(x0 + x, y0 + y)];
    }
  }
  return out;
}

void set_validity(Image& img, const Grid<uint8_t>& mask) {
  if (mask.width() != img.width || mask.height() != img.height) {
    throw Error(ErrorCode::DimensionMismatch, "mask size differs from image");
  }
  img.valid = mask.data();
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  out.valid = img.valid;
  const size_t n = static_cast<size_t>(img.width) * img.height;
  for (size_t i = 0; i < n; ++i) {
    const double* p = &img.samples[i * img.channels];
    out.samples[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

}  // namespace monster
