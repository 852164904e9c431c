#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "geometry.hpp"
#include "siddon.hpp"
#include "volume.hpp"

namespace drr {

struct Timing {
  double mean_ms = 0.0;
  double stdev_ms = 0.0;  // sample standard deviation
};

inline Timing summarize(const std::vector<double>& samples_ms) {
  Timing t;
  if (samples_ms.empty()) return t;
  for (double s : samples_ms) t.mean_ms += s;
  t.mean_ms /= static_cast<double>(samples_ms.size());
  if (samples_ms.size() > 1) {
    double ss = 0.0;
    for (double s : samples_ms) ss += (s - t.mean_ms) * (s - t.mean_ms);
    t.stdev_ms = std::sqrt(ss / static_cast<double>(samples_ms.size() - 1));
  }
  return t;
}

/// Wall-clock of `repeats` renders; only the render call is timed. With
/// `with_gradient` the render also carries pose derivatives.
inline Timing time_render(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec, int repeats,
                          bool with_gradient = false, const RenderOptions& options = {}) {
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(repeats));
  const auto seeded = seed_pose(pose);
  volatile double sink = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    if (with_gradient) {
      sink = sink + render(volume, seeded, spec, options).pixels.front().value;
    } else {
      sink = sink + render(volume, pose, spec, options).pixels.front();
    }
    samples.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return summarize(samples);
}

}  // namespace drr
