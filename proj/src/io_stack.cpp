#include <algorithm>
#include <cctype>

#include "wsireg/error.hpp"
#include "wsireg/io.hpp"

namespace wsireg::io {

namespace {

bool is_raster(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

// Numeric value of the trailing digit run in the stem, -1 if none.
long long stem_number(const std::filesystem::path& p) {
  const std::string stem = p.stem().string();
  std::size_t end = stem.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  if (end == stem.size()) return -1;
  return std::stoll(stem.substr(end));
}

}  // namespace

std::vector<std::filesystem::path> list_slices(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_raster(entry.path()))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const long long na = stem_number(a), nb = stem_number(b);
    if (na != nb) return na < nb;
    return a.filename().string() < b.filename().string();
  });
  return out;
}

std::vector<GrayImage> load_gray_stack(const std::filesystem::path& dir) {
  std::vector<GrayImage> stack;
  for (const auto& p : list_slices(dir)) {
    GrayImage img = load_gray(p);
    if (!stack.empty() && !img.same_dims(stack.front()))
      throw IoError("slice dimension mismatch: " + p.string());
    stack.push_back(std::move(img));
  }
  return stack;
}

std::vector<BinaryMask> load_mask_stack(const std::filesystem::path& dir) {
  std::vector<BinaryMask> stack;
  for (const auto& p : list_slices(dir)) {
    BinaryMask m = load_mask(p);
    if (!stack.empty() && !m.same_dims(stack.front()))
      throw IoError("mask dimension mismatch: " + p.string());
    stack.push_back(std::move(m));
  }
  return stack;
}

}  // namespace wsireg::io
