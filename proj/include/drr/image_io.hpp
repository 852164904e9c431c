#pragma once

// Image export: 16-bit binary PGM (display, min-max normalized) and a
// lossless float64 payload with a one-line JSON sidecar
// {"height":H,"width":W,"dtype":"f64"} stored next to it as <path>.json.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "image.hpp"
#include "volume_io.hpp"

namespace drr {

inline std::string encode_pgm16(const Image& image) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double v : image.pixels) {
    if (!std::isfinite(v)) continue;
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n65535\n";
  out.reserve(out.size() + 2 * image.size());
  const double range = hi - lo;
  for (double v : image.pixels) {
    std::uint16_t q = 0;
    if (std::isfinite(v) && range > 0.0) q = static_cast<std::uint16_t>(std::lround((v - lo) / range * 65535.0));
    out.push_back(static_cast<char>(q >> 8));  // PGM samples are big-endian
    out.push_back(static_cast<char>(q & 0xff));
  }
  return out;
}

inline void write_pgm16(const Image& image, const std::filesystem::path& path) {
  detail::write_file(path, encode_pgm16(image));
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

inline void write_image_f64(const Image& image, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["height"] = image.height;
  header["width"] = image.width;
  header["dtype"] = "f64";
  detail::write_file(sidecar_path(path), header.dump() + "\n");
  std::string payload;
  payload.reserve(8 * image.size());
  for (double v : image.pixels) detail::append_f64_le(payload, v);
  detail::write_file(path, payload);
}

inline Image read_image_f64(const std::filesystem::path& path) {
  const auto side = detail::read_file(sidecar_path(path));
  std::size_t offset = 0;
  nlohmann::json header;
  try {
    header = detail::parse_header_line(side, offset);
  } catch (const ParseError& e) {
    throw ParseError(sidecar_path(path).string() + ": " + e.what(), e.offset());
  }
  if (!header.contains("height") || !header.contains("width") || !header["height"].is_number_integer() ||
      !header["width"].is_number_integer() || header.value("dtype", "") != "f64")
    throw ParseError(sidecar_path(path).string() + ": sidecar needs integer height, width and dtype \"f64\"", 0);
  const int h = header["height"].get<int>(), w = header["width"].get<int>();
  if (h < 1 || w < 1) throw ParseError(sidecar_path(path).string() + ": image dimensions must be >= 1", 0);
  const auto bytes = detail::read_file(path);
  Image image(h, w);
  if (bytes.size() != 8 * image.size())
    throw CorruptFile(path.string() + ": payload has " + std::to_string(bytes.size()) + " bytes, sidecar declares " +
                      std::to_string(image.size()) + " float64 pixels");
  for (std::size_t i = 0; i < image.size(); ++i) image.pixels[i] = detail::load_le<double>(bytes.data() + 8 * i);
  return image;
}

}  // namespace drr
