#pragma once

// Exact ray/voxel-grid integration. Each detector pixel p receives
//
//   E = |p - s| * sum_m (alpha[m+1] - alpha[m]) * V(voxel at midpoint m)
//
// where alpha parameterizes the ray s + alpha (p - s) and the alpha[m] are
// the sorted crossings with the grid's orthogonal planes, bracketed by the
// ray's entry and exit parameters (clipped to the source..detector segment).
//
// `render` builds the full candidate set of plane crossings per ray, filters
// and sorts it. `render_iterative` walks the grid one crossing at a time and
// serves as an independent reference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "parallel.hpp"
#include "vec3.hpp"
#include "volume.hpp"

namespace drr {

/// Segments no longer than this (in alpha) are dropped before voxel lookup.
inline constexpr double kMinSegment = 1e-12;

/// Identifies where an alpha value came from so that it can be re-evaluated
/// with derivatives: plane `plane` along `axis`, or, for axis == kClip, the
/// constant 0 (source) or 1 (detector).
struct AlphaTag {
  static constexpr int kClip = -1;
  int axis = kClip;
  int plane = 0;
  friend bool operator==(const AlphaTag&, const AlphaTag&) = default;
};

struct Crossing {
  double alpha;
  AlphaTag tag;
};

struct EntryExit {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  AlphaTag min_tag;
  AlphaTag max_tag;
  bool hit() const noexcept { return alpha_min < alpha_max; }
};

/// Per-ray result of the crossing computation.
struct RayIntersections {
  EntryExit bounds;
  std::vector<Crossing> alphas;  // sorted, first and last are the bounds
};

/// Parameter of the crossing with a plane at `coordinate` along one axis.
/// Every path (sort, walk, derivatives) goes through this expression so
/// identical crossings compare equal.
template <class T>
inline T plane_alpha(double coordinate, const T& source, const T& delta) {
  return (coordinate - source) / delta;
}

inline void require_ray(const Vec3d& source, const Vec3d& pixel) {
  if (source.x == pixel.x && source.y == pixel.y && source.z == pixel.z)
    throw DegenerateRay("source and detector pixel coincide");
}

/// alpha for every plane 0..n per axis; an axis the ray is parallel to
/// contributes nothing.
inline std::array<std::vector<double>, 3> plane_alphas(const Vec3d& source, const Vec3d& pixel, const Volume& volume) {
  require_ray(source, pixel);
  std::array<std::vector<double>, 3> out;
  for (int a = 0; a < 3; ++a) {
    const double delta = pixel[a] - source[a];
    if (delta == 0.0) continue;
    out[a].reserve(volume.dims()[a] + 1);
    for (int k = 0; k <= volume.dims()[a]; ++k) out[a].push_back(plane_alpha(volume.plane(a, k), source[a], delta));
  }
  return out;
}

/// Slab-method entry and exit, clipped to [0, 1]. A miss has alpha_min >= alpha_max.
inline EntryExit entry_exit(const Vec3d& source, const Vec3d& pixel, const Volume& volume) {
  require_ray(source, pixel);
  EntryExit ee;
  ee.alpha_min = 0.0;
  ee.min_tag = {AlphaTag::kClip, 0};
  ee.alpha_max = 1.0;
  ee.max_tag = {AlphaTag::kClip, 1};
  for (int a = 0; a < 3; ++a) {
    const int n = volume.dims()[a];
    const double delta = pixel[a] - source[a];
    if (delta == 0.0) {
      if (source[a] < volume.plane(a, 0) || source[a] > volume.plane(a, n)) {
        ee.alpha_min = 1.0;
        ee.alpha_max = 0.0;
        return ee;
      }
      continue;
    }
    const double first = plane_alpha(volume.plane(a, 0), source[a], delta);
    const double last = plane_alpha(volume.plane(a, n), source[a], delta);
    const bool ascending = first < last;
    const double lo = ascending ? first : last;
    const double hi = ascending ? last : first;
    if (lo > ee.alpha_min) {
      ee.alpha_min = lo;
      ee.min_tag = {a, ascending ? 0 : n};
    }
    if (hi < ee.alpha_max) {
      ee.alpha_max = hi;
      ee.max_tag = {a, ascending ? n : 0};
    }
  }
  return ee;
}

/// Entry/exit plus every plane crossing strictly inside, sorted by alpha.
/// `out` is reused storage; it is cleared first.
inline void collect_crossings(const Vec3d& source, const Vec3d& pixel, const Volume& volume, const EntryExit& ee,
                              std::vector<Crossing>& out) {
  out.clear();
  if (!ee.hit()) return;
  out.push_back({ee.alpha_min, ee.min_tag});
  for (int a = 0; a < 3; ++a) {
    const double delta = pixel[a] - source[a];
    if (delta == 0.0) continue;
    for (int k = 0; k <= volume.dims()[a]; ++k) {
      const double alpha = plane_alpha(volume.plane(a, k), source[a], delta);
      if (alpha > ee.alpha_min && alpha < ee.alpha_max) out.push_back({alpha, {a, k}});
    }
  }
  out.push_back({ee.alpha_max, ee.max_tag});
  std::sort(out.begin() + 1, out.end() - 1, [](const Crossing& l, const Crossing& r) { return l.alpha < r.alpha; });
}

inline RayIntersections ray_intersections(const Vec3d& source, const Vec3d& pixel, const Volume& volume) {
  RayIntersections r;
  r.bounds = entry_exit(source, pixel, volume);
  collect_crossings(source, pixel, volume, r.bounds, r.alphas);
  return r;
}

/// Voxel containing the point at `alpha`; indices are clamped into the grid.
inline Index3 voxel_at(const Vec3d& source, const Vec3d& delta, double alpha, const Volume& volume) {
  Index3 idx;
  for (int a = 0; a < 3; ++a) {
    const double pos = source[a] + alpha * delta[a];
    const double f = std::floor((pos - volume.origin()[a]) / volume.spacing()[a]);
    idx[a] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(volume.dims()[a] - 1)));
  }
  return idx;
}

/// Integrates one ray over sorted crossings. T is double for plain
/// rendering or a Dual to carry derivatives with respect to the pose; sort
/// order and voxel indices are taken from the values and held fixed.
template <class T>
T integrate_crossings(const Vec3<T>& source, const Vec3<T>& pixel, const Volume& volume,
                      const std::vector<Crossing>& crossings) {
  if (crossings.size() < 2) return T(0.0);
  const Vec3<T> delta = pixel - source;
  const Vec3d sv = value_of(source);
  const Vec3d dv = value_of(delta);

  auto alpha_of = [&](const Crossing& c) -> T {
    if (c.tag.axis == AlphaTag::kClip) return T(static_cast<double>(c.tag.plane));
    if constexpr (std::is_same_v<T, double>) {
      return c.alpha;
    } else {
      return plane_alpha(volume.plane(c.tag.axis, c.tag.plane), source[c.tag.axis], delta[c.tag.axis]);
    }
  };

  const auto data = volume.data();
  T sum(0.0);
  std::size_t cached_index = 0;
  T cached_alpha = alpha_of(crossings.front());
  for (std::size_t m = 0; m + 1 < crossings.size(); ++m) {
    const double lo = crossings[m].alpha;
    const double hi = crossings[m + 1].alpha;
    if (hi - lo <= kMinSegment) continue;
    const Index3 v = voxel_at(sv, dv, 0.5 * (lo + hi), volume);
    const double density = data[volume.flat_index(v[0], v[1], v[2])];
    if (density == 0.0) continue;
    const T start = cached_index == m ? cached_alpha : alpha_of(crossings[m]);
    cached_alpha = alpha_of(crossings[m + 1]);
    cached_index = m + 1;
    sum += (cached_alpha - start) * density;
  }
  return norm(delta) * sum;
}

/// Radiological path of one ray by the sort-based method.
template <class T>
T trace_ray(const Vec3<T>& source, const Vec3<T>& pixel, const Volume& volume, std::vector<Crossing>& scratch) {
  const Vec3d sv = value_of(source);
  const Vec3d pv = value_of(pixel);
  const EntryExit ee = entry_exit(sv, pv, volume);
  if (!ee.hit()) return T(0.0);
  collect_crossings(sv, pv, volume, ee, scratch);
  return integrate_crossings(source, pixel, volume, scratch);
}

/// Radiological path of one ray by walking plane crossings in order.
inline double trace_ray_iterative(const Vec3d& source, const Vec3d& pixel, const Volume& volume) {
  const EntryExit ee = entry_exit(source, pixel, volume);
  if (!ee.hit()) return 0.0;
  const Vec3d delta = pixel - source;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Index3 voxel{};
  std::array<int, 3> next_plane{};
  std::array<int, 3> step{};
  std::array<double, 3> next_alpha{kInf, kInf, kInf};
  for (int a = 0; a < 3; ++a) {
    const int n = volume.dims()[a];
    if (delta[a] == 0.0) {
      const double f = std::floor((source[a] - volume.origin()[a]) / volume.spacing()[a]);
      voxel[a] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(n - 1)));
      continue;
    }
    auto alpha_at = [&](int k) { return plane_alpha(volume.plane(a, k), source[a], delta[a]); };
    // First plane strictly beyond the entry point in the travel direction.
    const double entry = (source[a] + ee.alpha_min * delta[a] - volume.origin()[a]) / volume.spacing()[a];
    if (delta[a] > 0.0) {
      step[a] = 1;
      int k = std::clamp(static_cast<int>(std::floor(entry)), 0, n);
      while (k > 0 && alpha_at(k - 1) > ee.alpha_min) --k;
      while (k <= n && alpha_at(k) <= ee.alpha_min) ++k;
      next_plane[a] = k;
      voxel[a] = k - 1;
    } else {
      step[a] = -1;
      int k = std::clamp(static_cast<int>(std::ceil(entry)), 0, n);
      while (k < n && alpha_at(k + 1) > ee.alpha_min) ++k;
      while (k >= 0 && alpha_at(k) <= ee.alpha_min) --k;
      next_plane[a] = k;
      voxel[a] = k;
    }
    voxel[a] = std::clamp(voxel[a], 0, n - 1);
    if (next_plane[a] >= 0 && next_plane[a] <= n) next_alpha[a] = alpha_at(next_plane[a]);
  }

  const auto data = volume.data();
  double sum = 0.0;
  double current = ee.alpha_min;
  while (current < ee.alpha_max) {
    const double upcoming = std::min({next_alpha[0], next_alpha[1], next_alpha[2], ee.alpha_max});
    if (upcoming - current > kMinSegment) sum += (upcoming - current) * data[volume.flat_index(voxel[0], voxel[1], voxel[2])];
    for (int a = 0; a < 3; ++a) {
      if (next_alpha[a] != upcoming) continue;
      const int n = volume.dims()[a];
      next_plane[a] += step[a];
      voxel[a] = std::clamp(voxel[a] + step[a], 0, n - 1);
      next_alpha[a] = (next_plane[a] >= 0 && next_plane[a] <= n)
                          ? plane_alpha(volume.plane(a, next_plane[a]), source[a], delta[a])
                          : kInf;
    }
    current = upcoming;
  }
  return norm(delta) * sum;
}

struct RenderOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Sort-based rendering of an explicit ray set.
template <class T>
BasicImage<T> render_rays(const Volume& volume, const RaySet<T>& rays, const RenderOptions& options = {}) {
  BasicImage<T> image(rays.height, rays.width);
  parallel_blocks(rays.height, options.threads, [&](int begin, int end) {
    std::vector<Crossing> scratch;
    scratch.reserve(static_cast<std::size_t>(volume.dims()[0] + volume.dims()[1] + volume.dims()[2] + 3));
    for (int h = begin; h < end; ++h)
      for (int w = 0; w < rays.width; ++w) image.at(h, w) = trace_ray(rays.source, rays.pixel(h, w), volume, scratch);
  });
  return image;
}

inline Image render_rays_iterative(const Volume& volume, const RaySet<double>& rays, const RenderOptions& options = {}) {
  Image image(rays.height, rays.width);
  parallel_blocks(rays.height, options.threads, [&](int begin, int end) {
    for (int h = begin; h < end; ++h)
      for (int w = 0; w < rays.width; ++w) image.at(h, w) = trace_ray_iterative(rays.source, rays.pixel(h, w), volume);
  });
  return image;
}

/// DRR at `pose`. With T = Dual<7> (see seed_pose) every pixel also carries
/// its derivative with respect to the seven pose parameters.
template <class T>
BasicImage<T> render(const Volume& volume, const Pose<T>& pose, const DetectorSpec& spec,
                     const RenderOptions& options = {}) {
  validate(spec);
  return render_rays(volume, detector_grid(pose, spec), options);
}

inline Image render_iterative(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                              const RenderOptions& options = {}) {
  validate(spec);
  return render_rays_iterative(volume, detector_grid(pose, spec), options);
}

}  // namespace drr
