#pragma once

// Shared test geometry and reference computations that do not go through
// the library's ray-tracing code.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <drr/drr.hpp>

namespace drr::testing {

/// Chord length of segment s -> p through the box [lo, hi], by intersecting
/// per-axis parameter intervals.
inline double box_chord(const Vec3d& s, const Vec3d& p, const Vec3d& lo, const Vec3d& hi) {
  double t0 = 0.0, t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double d = p[a] - s[a];
    if (d == 0.0) {
      if (s[a] < lo[a] || s[a] > hi[a]) return 0.0;
      continue;
    }
    double ta = (lo[a] - s[a]) / d, tb = (hi[a] - s[a]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 <= t0) return 0.0;
  const double dx = p.x - s.x, dy = p.y - s.y, dz = p.z - s.z;
  return (t1 - t0) * std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline Vec3d box_lo(const Volume& v) { return v.origin(); }
inline Vec3d box_hi(const Volume& v) {
  return {v.origin().x + v.extent(0), v.origin().y + v.extent(1), v.origin().z + v.extent(2)};
}

/// Chest-scale torso: 48^3 voxels of 7.5 mm (360 mm across).
inline Volume torso_volume() { return make_phantom(PhantomKind::torso, {48, 48, 48}, {7.5, 7.5, 7.5}, 1.0); }

/// Anterior-posterior view of the torso, source 400 mm from the isocenter.
inline PoseParameters torso_truth() { return {400.0, degrees(90.0), degrees(90.0), 0.0, {0.0, 0.0, 0.0}}; }

/// Detector covering 400 mm at the detector plane regardless of resolution.
inline DetectorSpec torso_spec(const Volume& v, int size) { return DetectorSpec::centered_on(v, size, size, 800.0 / size); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("drr_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace drr::testing
