#pragma once

#include <filesystem>

#include "monster/image.hpp"

namespace monster {

/// Reads 8/16-bit grayscale or RGB PNG (alpha dropped), scaled to [0,1].
Image read_png(const std::filesystem::path& file);

enum class PngDepth { Bits8 = 8, Bits16 = 16 };
void write_png(const std::filesystem::path& file, const Image& img,
               PngDepth depth = PngDepth::Bits16);

/// 8-bit grayscale PNG of a validity mask: 0 invalid, 255 valid.
void write_mask_png(const std::filesystem::path& file, const Grid<uint8_t>& mask);
Grid<uint8_t> read_mask_png(const std::filesystem::path& file);

/// Indexed 8-bit PNG with raw labels (e.g. 0/1/2 source masks).
void write_label_png(const std::filesystem::path& file, const Grid<uint8_t>& labels);
Grid<uint8_t> read_label_png(const std::filesystem::path& file);

/// Grayscale "Pf" portable float map, little-endian (negative scale),
/// bottom row first. Invalid pixels are NaN.
template <typename Tag>
void write_pfm(const std::filesystem::path& file, const MaskedMap<Tag>& map);
template <typename Tag>
MaskedMap<Tag> read_pfm(const std::filesystem::path& file);

}  // namespace monster
