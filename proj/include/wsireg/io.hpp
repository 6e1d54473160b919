#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wsireg/image.hpp"

namespace wsireg::io {

// Raster ingestion. PNG (8-bit gray or 24-bit RGB; palette and 16-bit inputs
// are normalized) and single-page uncompressed TIFF. RGB inputs are converted
// to grayscale on load via the 0.299/0.587/0.114 luminance weights.
GrayImage load_gray(const std::filesystem::path& path);
RgbImage load_rgb(const std::filesystem::path& path);

// Masks are 8-bit PNG, 0 = background, nonzero = foreground.
BinaryMask load_mask(const std::filesystem::path& path);

void save_png_gray(const GrayImage& img, const std::filesystem::path& path);
void save_png_rgb(const RgbImage& img, const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

// Slice files in a directory, ordered by the numeric value of their stems
// (zero-padded names sort the same way). Recognizes .png/.tif/.tiff.
std::vector<std::filesystem::path> list_slices(const std::filesystem::path& dir);

// Loads all slices as grayscale; throws if dimensions are inconsistent,
// naming the offending file.
std::vector<GrayImage> load_gray_stack(const std::filesystem::path& dir);
std::vector<BinaryMask> load_mask_stack(const std::filesystem::path& dir);

namespace detail {
// Minimal single-page TIFF reader: 8-bit gray or RGB, uncompressed strips,
// either byte order. Enough for flat exports at the working magnification.
RgbImage decode_tiff(const std::vector<std::uint8_t>& bytes,
                     const std::string& name);
}  // namespace detail

}  // namespace wsireg::io
