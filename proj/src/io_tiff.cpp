#include <cstdint>
#include <cstring>

#include "wsireg/error.hpp"
#include "wsireg/io.hpp"

namespace wsireg::io::detail {

namespace {

struct Reader {
  const std::uint8_t* p;
  std::size_t n;
  bool little;

  std::uint16_t u16(std::size_t off) const {
    if (off + 2 > n) throw IoError("TIFF: truncated file");
    return little ? static_cast<std::uint16_t>(p[off] | (p[off + 1] << 8))
                  : static_cast<std::uint16_t>((p[off] << 8) | p[off + 1]);
  }
  std::uint32_t u32(std::size_t off) const {
    if (off + 4 > n) throw IoError("TIFF: truncated file");
    return little ? (static_cast<std::uint32_t>(p[off]) |
                     (static_cast<std::uint32_t>(p[off + 1]) << 8) |
                     (static_cast<std::uint32_t>(p[off + 2]) << 16) |
                     (static_cast<std::uint32_t>(p[off + 3]) << 24))
                  : ((static_cast<std::uint32_t>(p[off]) << 24) |
                     (static_cast<std::uint32_t>(p[off + 1]) << 16) |
                     (static_cast<std::uint32_t>(p[off + 2]) << 8) |
                     static_cast<std::uint32_t>(p[off + 3]));
  }
};

struct Entry {
  std::uint16_t tag = 0;
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t value_off = 0;  // offset of the value field itself
};

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;  // BYTE/ASCII/SBYTE/UNDEF
    case 3: case 8: return 2;                  // SHORT
    case 4: case 9: return 4;                  // LONG
    case 5: case 10: return 8;                 // RATIONAL
    default: return 0;
  }
}

// Reads entry value i as an unsigned integer (SHORT or LONG).
std::uint32_t entry_uint(const Reader& r, const Entry& e, std::uint32_t i) {
  const std::size_t sz = type_size(e.type);
  if (sz == 0 || (e.type != 3 && e.type != 4))
    throw IoError("TIFF: unsupported tag value type");
  const std::size_t total = sz * e.count;
  const std::size_t base = total <= 4 ? e.value_off : r.u32(e.value_off);
  const std::size_t off = base + sz * i;
  return e.type == 3 ? r.u16(off) : r.u32(off);
}

}  // namespace

RgbImage decode_tiff(const std::vector<std::uint8_t>& bytes,
                     const std::string& name) {
  Reader r{bytes.data(), bytes.size(), true};
  if (bytes.size() < 8) throw IoError("TIFF: file too small: " + name);
  if (bytes[0] == 'I' && bytes[1] == 'I')
    r.little = true;
  else if (bytes[0] == 'M' && bytes[1] == 'M')
    r.little = false;
  else
    throw IoError("not a TIFF file: " + name);
  if (r.u16(2) != 42) throw IoError("TIFF: bad magic: " + name);

  const std::uint32_t ifd = r.u32(4);
  const std::uint16_t n_entries = r.u16(ifd);

  std::uint32_t width = 0, height = 0, compression = 1, spp = 1;
  std::uint32_t rows_per_strip = 0xFFFFFFFFu, planar = 1;
  std::vector<std::uint32_t> bits, strip_offsets, strip_counts;

  for (std::uint16_t i = 0; i < n_entries; ++i) {
    const std::size_t eo = ifd + 2 + static_cast<std::size_t>(i) * 12;
    Entry e{r.u16(eo), r.u16(eo + 2), r.u32(eo + 4), eo + 8};
    switch (e.tag) {
      case 256: width = entry_uint(r, e, 0); break;
      case 257: height = entry_uint(r, e, 0); break;
      case 258:
        for (std::uint32_t j = 0; j < e.count; ++j)
          bits.push_back(entry_uint(r, e, j));
        break;
      case 259: compression = entry_uint(r, e, 0); break;
      case 273:
        for (std::uint32_t j = 0; j < e.count; ++j)
          strip_offsets.push_back(entry_uint(r, e, j));
        break;
      case 277: spp = entry_uint(r, e, 0); break;
      case 278: rows_per_strip = entry_uint(r, e, 0); break;
      case 279:
        for (std::uint32_t j = 0; j < e.count; ++j)
          strip_counts.push_back(entry_uint(r, e, j));
        break;
      case 284: planar = entry_uint(r, e, 0); break;
      default: break;
    }
  }

  if (width == 0 || height == 0)
    throw IoError("TIFF: missing dimensions: " + name);
  if (compression != 1)
    throw IoError("TIFF: only uncompressed strips supported: " + name);
  if (planar != 1) throw IoError("TIFF: planar layout unsupported: " + name);
  if (spp != 1 && spp != 3)
    throw IoError("TIFF: expected 1 or 3 samples per pixel: " + name);
  for (std::uint32_t b : bits)
    if (b != 8) throw IoError("TIFF: only 8-bit samples supported: " + name);
  if (strip_offsets.empty()) throw IoError("TIFF: no strip offsets: " + name);

  const std::size_t row_bytes = static_cast<std::size_t>(width) * spp;
  std::vector<std::uint8_t> raster(row_bytes * height);
  std::size_t written = 0;
  for (std::size_t s = 0; s < strip_offsets.size(); ++s) {
    const std::size_t off = strip_offsets[s];
    const std::size_t cnt = s < strip_counts.size()
                                ? strip_counts[s]
                                : std::min<std::size_t>(raster.size() - written,
                                                        row_bytes * rows_per_strip);
    if (off + cnt > bytes.size())
      throw IoError("TIFF: strip out of bounds: " + name);
    const std::size_t take = std::min(cnt, raster.size() - written);
    std::memcpy(raster.data() + written, bytes.data() + off, take);
    written += take;
  }
  if (written < raster.size())
    throw IoError("TIFF: missing pixel data: " + name);

  RgbImage out(static_cast<int>(width), static_cast<int>(height));
  if (spp == 3) {
    std::memcpy(out.data(), raster.data(), raster.size());
  } else {
    for (std::size_t i = 0; i < raster.size(); ++i) {
      out.data()[3 * i] = raster[i];
      out.data()[3 * i + 1] = raster[i];
      out.data()[3 * i + 2] = raster[i];
    }
  }
  return out;
}

}  // namespace wsireg::io::detail
