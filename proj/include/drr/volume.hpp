#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "vec3.hpp"

namespace drr {

/// Scalar voxel grid. Voxel (i, j, k) covers
/// [origin + index * spacing, origin + (index + 1) * spacing) per axis, and the
/// k-th plane along an axis sits at origin + k * spacing for k in [0, n].
/// Storage is x-fastest: i + nx * (j + ny * k). Immutable once built.
class Volume {
 public:
  Volume(Index3 dims, Vec3d spacing, Vec3d origin, std::vector<double> data)
      : dims_(dims), spacing_(spacing), origin_(origin), data_(std::move(data)) {
    for (int a = 0; a < 3; ++a) {
      if (dims_[a] < 1) throw InvalidArgument("volume dims must be >= 1 on every axis");
      if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
        throw InvalidArgument("volume spacing must be positive and finite on every axis");
      if (!std::isfinite(origin_[a])) throw InvalidArgument("volume origin must be finite");
    }
    if (data_.size() != voxel_count())
      throw InvalidArgument("volume data length " + std::to_string(data_.size()) + " does not match dims product " +
                            std::to_string(voxel_count()));
  }

  const Index3& dims() const noexcept { return dims_; }
  const Vec3d& spacing() const noexcept { return spacing_; }
  const Vec3d& origin() const noexcept { return origin_; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t voxel_count() const noexcept {
    return static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(dims_[2]);
  }

  std::size_t flat_index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  double at(int i, int j, int k) const noexcept { return data_[flat_index(i, j, k)]; }

  /// Coordinate of plane `k` (0..n) along `axis`.
  double plane(int axis, int k) const noexcept { return origin_[axis] + k * spacing_[axis]; }
  double extent(int axis) const noexcept { return dims_[axis] * spacing_[axis]; }
  Vec3d center() const noexcept {
    return {origin_.x + 0.5 * extent(0), origin_.y + 0.5 * extent(1), origin_.z + 0.5 * extent(2)};
  }

  /// Copy with every density multiplied by `factor`.
  Volume scaled(double factor) const {
    std::vector<double> d(data_);
    for (auto& v : d) v *= factor;
    return Volume(dims_, spacing_, origin_, std::move(d));
  }
  Volume with_origin(const Vec3d& origin) const { return Volume(dims_, spacing_, origin, data_); }

 private:
  Index3 dims_;
  Vec3d spacing_;
  Vec3d origin_;
  std::vector<double> data_;
};

enum class PhantomKind {
  uniform,
  sphere,
  off_center_cube,
  single_voxel,
  sphere_cube,  // sphere plus a denser off-center cube; has no mirror symmetry
  torso,        // chest-like arrangement of ellipsoids, asymmetric on every axis
};

inline PhantomKind parse_phantom_kind(std::string_view name) {
  if (name == "uniform") return PhantomKind::uniform;
  if (name == "sphere") return PhantomKind::sphere;
  if (name == "off_center_cube") return PhantomKind::off_center_cube;
  if (name == "single_voxel") return PhantomKind::single_voxel;
  if (name == "sphere_cube") return PhantomKind::sphere_cube;
  if (name == "torso") return PhantomKind::torso;
  throw InvalidArgument("unknown phantom kind '" + std::string(name) + "'");
}

namespace detail {

inline bool in_sphere(const Index3& dims, const Vec3d& spacing, int i, int j, int k) {
  const double radius = 0.4 * std::min({dims[0] * spacing.x, dims[1] * spacing.y, dims[2] * spacing.z});
  const double dx = (i + 0.5 - 0.5 * dims[0]) * spacing.x;
  const double dy = (j + 0.5 - 0.5 * dims[1]) * spacing.y;
  const double dz = (k + 0.5 - 0.5 * dims[2]) * spacing.z;
  return dx * dx + dy * dy + dz * dz <= radius * radius;
}

inline bool in_cube(const Index3& dims, int i, int j, int k) {
  auto inside = [](int idx, int n) {
    const double f = (idx + 0.5) / n;
    return f >= 0.25 && f <= 0.5;
  };
  return inside(i, dims[0]) && inside(j, dims[1]) && inside(k, dims[2]);
}

/// Density of the torso phantom at normalized coordinates in [-1, 1]^3
/// (x left-right, y anterior-posterior, z inferior-superior), scaled by
/// `density`. Later structures overwrite earlier ones.
inline double torso_density(double x, double y, double z) {
  auto ellipsoid = [&](double cx, double cy, double cz, double rx, double ry, double rz) {
    const double u = (x - cx) / rx, v = (y - cy) / ry, w = (z - cz) / rz;
    return u * u + v * v + w * w <= 1.0;
  };
  double d = 0.0;
  if ((x / 0.85) * (x / 0.85) + (y / 0.6) * (y / 0.6) <= 1.0 && std::abs(z) <= 0.9) d = 1.0;  // body
  if (d == 0.0) return 0.0;
  if (ellipsoid(-0.38, 0.02, 0.15, 0.30, 0.38, 0.62)) d = 0.2;   // right lung
  if (ellipsoid(0.40, 0.05, 0.22, 0.24, 0.33, 0.52)) d = 0.2;    // left lung, displaced by the heart
  if (ellipsoid(0.12, -0.18, -0.12, 0.24, 0.22, 0.26)) d = 1.1;  // heart
  if (ellipsoid(-0.28, 0.0, -0.72, 0.45, 0.42, 0.30)) d = 1.15;  // liver dome
  if ((x / 0.1) * (x / 0.1) + ((y - 0.42) / 0.1) * ((y - 0.42) / 0.1) <= 1.0 && std::abs(z) <= 0.9) d = 2.0;  // spine
  if (std::abs(x) <= 0.06 && std::abs(y + 0.52) <= 0.04 && z >= -0.2 && z <= 0.5) d = 1.8;                   // sternum
  if (ellipsoid(0.55, -0.25, 0.62, 0.07, 0.07, 0.07)) d = 3.0;   // dense marker
  return d;
}

}  // namespace detail

/// Synthetic test volumes. The sphere has radius 0.4 * (smallest extent) about
/// the volume center; the cube spans the [0.25, 0.5] fraction of every axis.
/// `sphere_cube` adds `density` inside the sphere and `2 * density` more
/// inside the cube.
inline Volume make_phantom(PhantomKind kind, Index3 dims, Vec3d spacing, double density, Vec3d origin = {}) {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw InvalidArgument("phantom dims must be >= 1");
    if (!(spacing[a] > 0.0)) throw InvalidArgument("phantom spacing must be positive");
  }
  if (!std::isfinite(density)) throw InvalidArgument("phantom density must be finite");

  std::vector<double> data(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0.0);
  std::size_t idx = 0;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i, ++idx) {
        switch (kind) {
          case PhantomKind::uniform:
            data[idx] = density;
            break;
          case PhantomKind::sphere:
            if (detail::in_sphere(dims, spacing, i, j, k)) data[idx] = density;
            break;
          case PhantomKind::off_center_cube:
            if (detail::in_cube(dims, i, j, k)) data[idx] = density;
            break;
          case PhantomKind::single_voxel:
            if (i == dims[0] / 2 && j == dims[1] / 2 && k == dims[2] / 2) data[idx] = density;
            break;
          case PhantomKind::sphere_cube:
            if (detail::in_sphere(dims, spacing, i, j, k)) data[idx] += density;
            if (detail::in_cube(dims, i, j, k)) data[idx] += 2.0 * density;
            break;
          case PhantomKind::torso:
            data[idx] = density * detail::torso_density(2.0 * (i + 0.5) / dims[0] - 1.0, 2.0 * (j + 0.5) / dims[1] - 1.0,
                                                        2.0 * (k + 0.5) / dims[2] - 1.0);
            break;
        }
      }
  return Volume(dims, spacing, origin, std::move(data));
}

}  // namespace drr
