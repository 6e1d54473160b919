#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

#include "wsireg/error.hpp"
#include "wsireg/io.hpp"
#include "wsireg/preprocess.hpp"

namespace wsireg::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RgbImage read_png_rgb(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows;
  RgbImage out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  out = RgbImage(w, h);
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = out.pixel(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png(const std::filesystem::path& path, int w, int h, int channels,
               const std::uint8_t* data) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_const_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    rows[y] = data + static_cast<std::size_t>(y) * w * channels;
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

bool has_png_magic(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  const std::size_t got = std::fread(sig, 1, 8, fp.get());
  return got == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  std::fseek(fp.get(), 0, SEEK_END);
  const long sz = std::ftell(fp.get());
  std::fseek(fp.get(), 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(sz > 0 ? static_cast<std::size_t>(sz) : 0);
  if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size())
    throw IoError("short read on " + path.string());
  return bytes;
}

}  // namespace

RgbImage load_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw IoError("no such file: " + path.string());
  if (has_png_magic(path)) return read_png_rgb(path);
  return detail::decode_tiff(read_all(path), path.string());
}

GrayImage load_gray(const std::filesystem::path& path) {
  return preprocess::to_grayscale(load_rgb(path));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const RgbImage rgb = load_rgb(path);
  BinaryMask m(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) m.set(x, y, rgb.pixel(x, y)[0] != 0);
  return m;
}

void save_png_gray(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    float v = img.data()[i];
    if (v < 0.0f) v = 0.0f;
    if (v > 255.0f) v = 255.0f;
    bytes[i] = static_cast<std::uint8_t>(v + 0.5f);
  }
  write_png(path, img.width(), img.height(), 1, bytes.data());
}

void save_png_rgb(const RgbImage& img, const std::filesystem::path& path) {
  write_png(path, img.width(), img.height(), 3, img.data());
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    bytes[i] = mask.data()[i] ? 255 : 0;
  write_png(path, mask.width(), mask.height(), 1, bytes.data());
}

}  // namespace wsireg::io
