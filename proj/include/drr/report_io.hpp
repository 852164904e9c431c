#pragma once

// Text outputs of the registration tools: JSON-lines traces, landscape CSV.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "registration.hpp"
#include "volume_io.hpp"

namespace drr {

/// One JSON object per iteration: {"iter":k,"pose":[theta,phi,gamma,bx,by,bz],"loss":L}.
inline std::string encode_trace(const RegistrationTrace& trace) {
  std::string out;
  for (const auto& e : trace.entries) {
    nlohmann::ordered_json line;
    line["iter"] = e.iter;
    line["pose"] = e.pose;
    line["loss"] = e.loss;
    out += line.dump();
    out += '\n';
  }
  return out;
}

inline void write_trace(const RegistrationTrace& trace, const std::filesystem::path& path) {
  detail::write_file(path, encode_trace(trace));
}

inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// First row: axis label(s) then the first axis' offsets. Then one row per
/// second-axis offset (or a single "loss" row): the offset, then the losses.
/// Offsets are in radians or mm.
inline std::string encode_landscape_csv(const Landscape& land) {
  std::ostringstream out;
  const auto& ax = land.axes[0];
  const bool two = land.axes.size() > 1;
  out << kPoseParamNames[ax.param];
  if (two) out << '\\' << kPoseParamNames[land.axes[1].param];
  for (int i = 0; i < ax.samples; ++i) out << ',' << format_real(ax.coordinate(i));
  out << '\n';
  const int rows = two ? land.axes[1].samples : 1;
  for (int j = 0; j < rows; ++j) {
    out << (two ? format_real(land.axes[1].coordinate(j)) : std::string("loss"));
    for (int i = 0; i < ax.samples; ++i) out << ',' << format_real(land.at(i, j));
    out << '\n';
  }
  return out.str();
}

inline void write_landscape_csv(const Landscape& land, const std::filesystem::path& path) {
  detail::write_file(path, encode_landscape_csv(land));
}

}  // namespace drr
