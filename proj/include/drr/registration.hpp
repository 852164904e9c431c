#pragma once

// Six-parameter slice-to-volume registration by gradient descent with
// classical momentum, initialization sampling, and loss-landscape sweeps.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "gradient.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "siddon.hpp"
#include "volume.hpp"

namespace drr {

/// Parameters the optimizer moves; rho stays fixed.
inline constexpr std::array<PoseParam, 6> kRegistrationParams = {kTheta, kPhi, kGamma, kShiftX, kShiftY, kShiftZ};

using RegistrationVector = std::array<double, 6>;

inline RegistrationVector registration_vector(const PoseParameters& pose) {
  RegistrationVector v{};
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pose[kRegistrationParams[i]];
  return v;
}

struct OptimizerConfig {
  double lr_rotation = 5.3e-2;    // per radian
  double lr_translation = 7.5e1;  // per mm
  double momentum = 0.9;
  int max_iters = 250;
  double converged_threshold = -0.999;
  LossKind loss_kind = LossKind::neg_zncc;
};

inline void validate(const OptimizerConfig& c) {
  if (!(c.lr_rotation > 0.0) || !(c.lr_translation > 0.0)) throw InvalidArgument("learning rates must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw InvalidArgument("momentum must be in [0, 1)");
  if (c.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
}

enum class RegistrationStatus {
  converged,
  max_iters,          // iteration budget spent without reaching the threshold
  metric_undefined,   // loss or gradient undefined at some iterate (e.g. every ray misses)
};

inline const char* to_string(RegistrationStatus s) {
  switch (s) {
    case RegistrationStatus::converged: return "converged";
    case RegistrationStatus::max_iters: return "max_iters";
    case RegistrationStatus::metric_undefined: return "metric_undefined";
  }
  return "?";
}

struct TraceEntry {
  int iter = 0;
  RegistrationVector pose{};
  double loss = 0.0;
};

struct RegistrationTrace {
  std::vector<TraceEntry> entries;
  RegistrationStatus status = RegistrationStatus::max_iters;
  bool converged = false;
  int iterations_used = 0;  // index of the last evaluated iterate
  PoseParameters final_pose{};
};

/// Momentum descent: v <- momentum * v - lr * grad, pose <- pose + v, with
/// separate learning rates for the angles and the shifts. Iterate 0 is
/// `initial`; stops as soon as the loss drops below the threshold.
inline RegistrationTrace register_pose(const Image& fixed, const Volume& volume, const PoseParameters& initial,
                                       const DetectorSpec& spec, const OptimizerConfig& config,
                                       const RenderOptions& options = {}) {
  validate(config);
  validate(initial);
  RegistrationTrace trace;
  PoseParameters pose = initial;
  RegistrationVector velocity{};
  for (int iter = 0; iter <= config.max_iters; ++iter) {
    GradientRecord record;
    try {
      record = loss_and_gradient(volume, pose, spec, fixed, config.loss_kind, options);
    } catch (const MetricUndefined&) {
      trace.status = RegistrationStatus::metric_undefined;
      break;
    } catch (const GradientUndefined&) {
      trace.status = RegistrationStatus::metric_undefined;
      break;
    }
    trace.entries.push_back({iter, registration_vector(pose), record.value});
    trace.iterations_used = iter;
    trace.final_pose = pose;
    if (record.value < config.converged_threshold) {
      trace.status = RegistrationStatus::converged;
      trace.converged = true;
      break;
    }
    if (iter == config.max_iters) break;
    for (std::size_t i = 0; i < velocity.size(); ++i) {
      const PoseParam p = kRegistrationParams[i];
      const double lr = i < 3 ? config.lr_rotation : config.lr_translation;
      velocity[i] = config.momentum * velocity[i] - lr * record.grad[p];
      pose[p] += velocity[i];
    }
  }
  if (trace.entries.empty()) trace.final_pose = initial;
  return trace;
}

/// Uniform double in [0, 1) from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double degrees(double deg) { return deg * std::numbers::pi / 180.0; }

/// Half-widths for sampling around a pose: the neighbourhood where the loss
/// is expected to be convex (90 deg theta/phi, 45 deg gamma, 30 mm shift
/// ranges) and the wider stress-test ranges (120 deg, 60 mm).
inline PoseVector basin_half_widths() {
  return {0.0, degrees(45.0), degrees(45.0), degrees(22.5), 15.0, 15.0, 15.0};
}
inline PoseVector wide_half_widths() {
  return {0.0, degrees(60.0), degrees(60.0), degrees(60.0), 30.0, 30.0, 30.0};
}

/// `count` poses with each parameter drawn independently and uniformly from
/// [truth - half_width, truth + half_width]. Deterministic in `seed`.
inline std::vector<PoseParameters> sample_initializations(const PoseParameters& truth, const PoseVector& half_widths,
                                                          int count, std::uint64_t seed) {
  if (count < 0) throw InvalidArgument("sample count must be >= 0");
  for (double h : half_widths)
    if (!(h >= 0.0)) throw InvalidArgument("sampling half-widths must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<PoseParameters> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    PoseParameters p = truth;
    for (std::size_t i = 0; i < kPoseParamCount; ++i) p[i] = truth[i] + (2.0 * unit_uniform(rng) - 1.0) * half_widths[i];
    out.push_back(p);
  }
  return out;
}

struct LandscapeAxis {
  PoseParam param = kTheta;
  double half_width = 0.0;
  int samples = 3;

  double coordinate(int k) const { return -half_width + 2.0 * half_width * k / (samples - 1); }
};

/// Loss on a regular grid of pose offsets around the truth. `values` is
/// row-major with the first axis varying fastest; entries where the metric is
/// undefined hold +inf.
struct Landscape {
  std::vector<LandscapeAxis> axes;
  PoseParameters truth{};
  LossKind loss_kind = LossKind::neg_zncc;
  std::vector<double> values;

  double at(int i, int j = 0) const { return values[static_cast<std::size_t>(j) * axes[0].samples + i]; }
};

inline Landscape loss_landscape(const Volume& volume, const PoseParameters& truth, const DetectorSpec& spec,
                                LossKind kind, const std::vector<LandscapeAxis>& axes,
                                const RenderOptions& options = {}) {
  if (axes.empty() || axes.size() > 2) throw InvalidArgument("landscape takes one or two axes");
  for (const auto& a : axes) {
    if (a.samples < 3) throw InvalidArgument("landscape needs at least 3 samples per axis");
    if (!(a.half_width >= 0.0)) throw InvalidArgument("landscape half-width must be non-negative");
  }
  const Image fixed = render(volume, truth, spec, options);
  Landscape out{axes, truth, kind, {}};
  const int nx = axes[0].samples;
  const int ny = axes.size() > 1 ? axes[1].samples : 1;
  out.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  RenderOptions inner = options;
  inner.threads = 1;
  parallel_blocks(nx * ny, options.threads, [&](int begin, int end) {
    for (int idx = begin; idx < end; ++idx) {
      PoseParameters pose = truth;
      pose[axes[0].param] += axes[0].coordinate(idx % nx);
      if (axes.size() > 1) pose[axes[1].param] += axes[1].coordinate(idx / nx);
      try {
        out.values[idx] = evaluate_loss(volume, pose, spec, fixed, kind, inner);
      } catch (const MetricUndefined&) {
        out.values[idx] = std::numeric_limits<double>::infinity();
      }
    }
  });
  return out;
}

}  // namespace drr
