#pragma once

// `.dvol` volume files: one line of UTF-8 JSON
//   {"dims":[nx,ny,nz],"spacing":[dx,dy,dz],"origin":[bx,by,bz],"dtype":"f64"}
// terminated by '\n', followed by nx*ny*nz little-endian float64 values in
// x-fastest order. Also raw voxel import for f32 / i16 / u8 payloads.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "volume.hpp"

namespace drr {

namespace detail {

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  return v;
}

inline void append_f64_le(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  out.append(b, 8);
}

/// Splits "<json line>\n<payload>" and parses the header. Throws ParseError.
inline nlohmann::json parse_header_line(const std::vector<char>& bytes, std::size_t& payload_offset) {
  const auto newline = std::find(bytes.begin(), bytes.end(), '\n');
  if (newline == bytes.end()) throw ParseError("header line is not newline-terminated", bytes.size());
  const std::string line(bytes.begin(), newline);
  payload_offset = static_cast<std::size_t>(newline - bytes.begin()) + 1;
  try {
    auto header = nlohmann::json::parse(line);
    if (!header.is_object()) throw ParseError("header is not a JSON object", 0);
    return header;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON header: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

template <class Array>
Array header_triple(const nlohmann::json& header, const char* key) {
  const auto it = header.find(key);
  if (it == header.end() || !it->is_array() || it->size() != 3)
    throw ParseError(std::string("header key '") + key + "' must be an array of 3 numbers", 0);
  Array out{};
  for (int a = 0; a < 3; ++a) {
    if (!(*it)[a].is_number()) throw ParseError(std::string("header key '") + key + "' has a non-numeric entry", 0);
    out[a] = (*it)[a].template get<std::remove_reference_t<decltype(out[a])>>();
  }
  return out;
}

}  // namespace detail

inline std::string encode_volume(const Volume& volume) {
  nlohmann::ordered_json header;
  header["dims"] = {volume.dims()[0], volume.dims()[1], volume.dims()[2]};
  header["spacing"] = {volume.spacing().x, volume.spacing().y, volume.spacing().z};
  header["origin"] = {volume.origin().x, volume.origin().y, volume.origin().z};
  header["dtype"] = "f64";
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * volume.voxel_count());
  for (double v : volume.data()) detail::append_f64_le(out, v);
  return out;
}

inline Volume decode_volume(const std::vector<char>& bytes) {
  std::size_t offset = 0;
  const auto header = detail::parse_header_line(bytes, offset);
  const auto dims = detail::header_triple<Index3>(header, "dims");
  const auto spacing = detail::header_triple<Vec3d>(header, "spacing");
  const auto origin = detail::header_triple<Vec3d>(header, "origin");
  const auto dtype = header.find("dtype");
  if (dtype == header.end() || *dtype != "f64") throw ParseError("header key 'dtype' must be \"f64\"", 0);
  for (int a = 0; a < 3; ++a)
    if (dims[a] < 1) throw ParseError("header dims must be >= 1", 0);

  const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const std::size_t payload = bytes.size() - offset;
  if (payload != count * 8)
    throw CorruptFile("payload holds " + std::to_string(payload) + " bytes but header declares " +
                      std::to_string(count) + " float64 voxels (" + std::to_string(count * 8) + " bytes)");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = detail::load_le<double>(bytes.data() + offset + 8 * i);
  return Volume(dims, spacing, origin, std::move(data));
}

inline void save_volume(const Volume& volume, const std::filesystem::path& path) {
  detail::write_file(path, encode_volume(volume));
}

inline Volume load_volume(const std::filesystem::path& path) {
  try {
    return decode_volume(detail::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  } catch (const CorruptFile& e) {
    throw CorruptFile(path.string() + ": " + e.what());
  }
}

enum class RawElement { f32, i16, u8 };

inline RawElement parse_raw_element(std::string_view name) {
  if (name == "f32") return RawElement::f32;
  if (name == "i16") return RawElement::i16;
  if (name == "u8") return RawElement::u8;
  throw InvalidArgument("unknown raw element type '" + std::string(name) + "'");
}

inline std::size_t element_size(RawElement e) {
  switch (e) {
    case RawElement::f32: return 4;
    case RawElement::i16: return 2;
    case RawElement::u8: return 1;
  }
  return 0;
}

/// Headerless little-endian voxels, x-fastest. Values are cast directly to
/// double; `clamp_negative` replaces negative values with 0.
inline Volume import_raw(const std::filesystem::path& path, Index3 dims, Vec3d spacing, Vec3d origin,
                         RawElement element, bool clamp_negative = false) {
  for (int a = 0; a < 3; ++a)
    if (dims[a] < 1) throw InvalidArgument("raw import dims must be >= 1");
  const auto bytes = detail::read_file(path);
  const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const std::size_t esize = element_size(element);
  if (bytes.size() != count * esize)
    throw CorruptFile(path.string() + ": raw file has " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(count * esize));
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const char* p = bytes.data() + i * esize;
    switch (element) {
      case RawElement::f32: data[i] = detail::load_le<float>(p); break;
      case RawElement::i16: data[i] = detail::load_le<std::int16_t>(p); break;
      case RawElement::u8: data[i] = detail::load_le<std::uint8_t>(p); break;
    }
    if (clamp_negative && data[i] < 0.0) data[i] = 0.0;
  }
  return Volume(dims, spacing, origin, std::move(data));
}

}  // namespace drr
