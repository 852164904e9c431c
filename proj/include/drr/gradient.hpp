#pragma once

// Loss gradients with respect to the seven pose parameters, by forward-mode
// differentiation through rendering, plus finite-difference references.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <algorithm>
#include <vector>

#include "dual.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "siddon.hpp"
#include "volume.hpp"

namespace drr {

struct GradientRecord {
  double value = 0.0;
  PoseVector grad{};
};

using PoseDual = Dual<kPoseParamCount>;

/// Loss of the DRR at `pose` against `fixed`.
inline double evaluate_loss(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                            const Image& fixed, LossKind kind, const RenderOptions& options = {}) {
  return loss(render(volume, pose, spec, options), fixed, kind);
}

/// Loss and its exact gradient. The per-ray crossing order and the voxel of
/// each segment are held at their current values; both are piecewise
/// constant in the pose, so this is the derivative almost everywhere.
inline GradientRecord loss_and_gradient(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                                        const Image& fixed, LossKind kind, const RenderOptions& options = {}) {
  validate(pose);
  validate(spec);
  if (fixed.height != spec.height || fixed.width != spec.width)
    throw InvalidArgument("fixed image dimensions do not match the detector");
  if (std::abs(std::sin(pose.phi)) <= 1e-6) throw GradientUndefined("pose is at the polar singularity (sin(phi) ~ 0)");

  const auto moving = render(volume, seed_pose(pose), spec, options);
  const PoseDual l = loss(moving, fixed, kind);
  GradientRecord record{l.value, l.grad};
  for (double g : record.grad)
    if (!std::isfinite(g)) throw GradientUndefined("non-finite gradient component");
  return record;
}

enum class FiniteDifference { forward, central };

using Objective = std::function<double(const PoseParameters&)>;

/// Componentwise finite differences of an arbitrary objective.
inline PoseVector finite_difference_gradient(const Objective& objective, const PoseParameters& pose,
                                             const PoseVector& steps, FiniteDifference scheme) {
  for (double s : steps)
    if (!(s > 0.0)) throw InvalidArgument("finite-difference steps must be positive");
  PoseVector grad{};
  const double center = scheme == FiniteDifference::forward ? objective(pose) : 0.0;
  for (std::size_t i = 0; i < kPoseParamCount; ++i) {
    PoseParameters plus = pose;
    plus[i] += steps[i];
    if (scheme == FiniteDifference::forward) {
      grad[i] = (objective(plus) - center) / steps[i];
    } else {
      PoseParameters minus = pose;
      minus[i] -= steps[i];
      grad[i] = (objective(plus) - objective(minus)) / (2.0 * steps[i]);
    }
  }
  return grad;
}

inline PoseVector finite_difference_gradient(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                                             const Image& fixed, LossKind kind, const PoseVector& steps,
                                             FiniteDifference scheme, const RenderOptions& options = {}) {
  return finite_difference_gradient(
      [&](const PoseParameters& p) { return evaluate_loss(volume, p, spec, fixed, kind, options); }, pose, steps,
      scheme);
}

/// Default stencil: 1e-5 for angles (rad), 1e-3 for lengths (mm).
inline PoseVector default_fd_steps() { return {1e-3, 1e-5, 1e-5, 1e-5, 1e-3, 1e-3, 1e-3}; }

/// Fingerprint of the piecewise-smooth structure of a rendering. Along each
/// ray, consecutive segments of equal density form runs; the loss is smooth in
/// the pose as long as every run starts and ends on the same planes. The
/// fingerprint hashes, per ray, the plane starting each run and its density.
inline std::uint64_t branch_fingerprint(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec) {
  const auto rays = detector_grid(pose, spec);
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
  auto mix = [&hash](std::uint64_t v) {
    hash ^= v;
    hash *= 1099511628211ull;
  };
  auto mix_tag = [&mix](const AlphaTag& t) {
    mix(static_cast<std::uint64_t>(t.axis + 1) << 32 | static_cast<std::uint32_t>(t.plane));
  };
  const auto data = volume.data();
  std::vector<Crossing> crossings;
  for (const auto& pixel : rays.pixels) {
    const EntryExit ee = entry_exit(rays.source, pixel, volume);
    collect_crossings(rays.source, pixel, volume, ee, crossings);
    const Vec3d delta = pixel - rays.source;
    mix(0x9e3779b97f4a7c15ull);
    bool in_run = false;
    double run_density = 0.0;
    for (std::size_t m = 0; m + 1 < crossings.size(); ++m) {
      const double lo = crossings[m].alpha, hi = crossings[m + 1].alpha;
      if (hi - lo <= kMinSegment) continue;
      const Index3 v = voxel_at(rays.source, delta, 0.5 * (lo + hi), volume);
      const double density = data[volume.flat_index(v[0], v[1], v[2])];
      if (!in_run || density != run_density) {
        mix_tag(crossings[m].tag);
        mix(std::bit_cast<std::uint64_t>(density));
        in_run = true;
        run_density = density;
      }
    }
    if (in_run) mix_tag(crossings.back().tag);
  }
  return hash;
}

/// True when the smooth piece changes anywhere in pose +- step along `param`.
inline bool branch_change_within(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                                 std::size_t param, double step) {
  PoseParameters plus = pose, minus = pose;
  plus[param] += step;
  minus[param] -= step;
  const auto here = branch_fingerprint(volume, pose, spec);
  return branch_fingerprint(volume, plus, spec) != here || branch_fingerprint(volume, minus, spec) != here;
}

/// |a - b| / max(|a|, |b|), and 0 when both are 0.
inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}


/// Exact gradient next to central differences at one pose.
struct GradientCheck {
  PoseParameters pose{};
  double value = 0.0;
  PoseVector grad{};
  PoseVector fd{};
  PoseVector rel_err{};
  std::array<bool, kPoseParamCount> checked{};   // |grad| above the significance floor
  std::array<bool, kPoseParamCount> boundary{};  // smooth piece changes inside the stencil
  bool passed = true;                            // every checked component within tolerance
};

inline GradientCheck check_gradient(const Volume& volume, const PoseParameters& pose, const DetectorSpec& spec,
                                    const Image& fixed, LossKind kind, const PoseVector& steps = default_fd_steps(),
                                    double tolerance = 1e-5, double floor = 1e-8,
                                    const RenderOptions& options = {}) {
  GradientCheck c;
  c.pose = pose;
  const GradientRecord exact = loss_and_gradient(volume, pose, spec, fixed, kind, options);
  c.value = exact.value;
  c.grad = exact.grad;
  c.fd = finite_difference_gradient(volume, pose, spec, fixed, kind, steps, FiniteDifference::central, options);
  for (std::size_t i = 0; i < kPoseParamCount; ++i) {
    c.rel_err[i] = relative_error(c.grad[i], c.fd[i]);
    c.checked[i] = std::abs(c.grad[i]) > floor;
    c.boundary[i] = branch_change_within(volume, pose, spec, i, steps[i]);
    if (c.checked[i] && !(c.rel_err[i] < tolerance)) c.passed = false;
  }
  return c;
}

}  // namespace drr
