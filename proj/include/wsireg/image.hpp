#pragma once

#include <cstdint>
#include <vector>

#include "wsireg/error.hpp"

namespace wsireg {

// Single-channel raster with intensities in [0, 255]. Stored as float so
// blurred and interpolated values keep sub-integer precision.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f)
      : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw InvalidArgument("GrayImage: dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  GrayImage(int width, int height, std::vector<float> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1)
      throw InvalidArgument("GrayImage: dimensions must be >= 1");
    if (data_.size() != static_cast<std::size_t>(width) * height)
      throw InvalidArgument("GrayImage: data length != width * height");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const float* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  double mean() const {
    double s = 0.0;
    for (float v : data_) s += v;
    return data_.empty() ? 0.0 : s / static_cast<double>(data_.size());
  }

  bool same_dims(const GrayImage& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Interleaved 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw InvalidArgument("RgbImage: dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * height * 3, 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t* pixel(int x, int y) {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }
  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }
  std::uint8_t* data() { return data_.data(); }
  const std::uint8_t* data() const { return data_.data(); }
  std::size_t byte_size() const { return data_.size(); }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Per-pixel foreground flag, dimensions match the image it annotates.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw InvalidArgument("BinaryMask: dimensions must be >= 1");
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool get(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  const std::uint8_t* data() const { return bits_.data(); }
  std::uint8_t* data() { return bits_.data(); }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  bool same_dims(const BinaryMask& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }
  bool operator==(const BinaryMask& o) const {
    return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace wsireg
