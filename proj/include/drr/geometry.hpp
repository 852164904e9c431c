#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "vec3.hpp"
#include "volume.hpp"

namespace drr {

/// Indices of the seven pose parameters in gradient vectors.
enum PoseParam : std::size_t { kRho = 0, kTheta, kPhi, kGamma, kShiftX, kShiftY, kShiftZ, kPoseParamCount };

inline constexpr std::array<const char*, kPoseParamCount> kPoseParamNames = {"rho", "theta", "phi", "gamma",
                                                                             "bx",  "by",    "bz"};

/// Source/detector placement. `rho` is half the source-to-detector distance
/// (mm); `theta` is the azimuth from +x in the xy-plane and `phi` the polar
/// angle from +z (radians); `gamma` rolls the detector about its normal;
/// `shift` translates source and detector together (mm).
template <class T>
struct Pose {
  T rho{};
  T theta{};
  T phi{};
  T gamma{};
  Vec3<T> shift{};

  T& operator[](std::size_t i) {
    switch (i) {
      case kRho: return rho;
      case kTheta: return theta;
      case kPhi: return phi;
      case kGamma: return gamma;
      default: return shift[static_cast<int>(i - kShiftX)];
    }
  }
  const T& operator[](std::size_t i) const { return const_cast<Pose&>(*this)[i]; }
};

using PoseParameters = Pose<double>;
using PoseVector = std::array<double, kPoseParamCount>;

inline PoseVector to_vector(const PoseParameters& p) {
  return {p.rho, p.theta, p.phi, p.gamma, p.shift.x, p.shift.y, p.shift.z};
}
inline PoseParameters from_vector(const PoseVector& v) {
  return {v[0], v[1], v[2], v[3], {v[4], v[5], v[6]}};
}

inline void validate(const PoseParameters& pose) {
  for (std::size_t i = 0; i < kPoseParamCount; ++i)
    if (!std::isfinite(pose[i])) throw InvalidArgument(std::string("pose parameter ") + kPoseParamNames[i] + " is not finite");
  if (!(pose.rho > 0.0)) throw InvalidArgument("pose parameter rho must be positive");
}

/// Pose whose seven parameters are the independent variables of a Dual<7>.
inline Pose<Dual<kPoseParamCount>> seed_pose(const PoseParameters& p) {
  using D = Dual<kPoseParamCount>;
  Pose<D> out;
  for (std::size_t i = 0; i < kPoseParamCount; ++i) out[i] = D::variable(p[i], i);
  return out;
}

/// Fixed imaging constants.
struct DetectorSpec {
  int height = 1;
  int width = 1;
  double pitch_x = 1.0;  // spacing between columns, mm
  double pitch_y = 1.0;  // spacing between rows, mm
  Vec3d isocenter{};

  /// Detector centered on the volume's physical center.
  static DetectorSpec centered_on(const Volume& volume, int height, int width, double pitch) {
    return {height, width, pitch, pitch, volume.center()};
  }
};

inline void validate(const DetectorSpec& spec) {
  if (spec.height < 1 || spec.width < 1) throw InvalidArgument("detector height and width must be >= 1");
  if (!(spec.pitch_x > 0.0) || !(spec.pitch_y > 0.0)) throw InvalidArgument("detector pitch must be positive");
}

/// Source point plus one detector position per pixel, row-major (h * width + w).
template <class T>
struct RaySet {
  int height = 0;
  int width = 0;
  Vec3<T> source;
  std::vector<Vec3<T>> pixels;

  const Vec3<T>& pixel(int h, int w) const { return pixels[static_cast<std::size_t>(h) * width + w]; }
};

/// Radial direction u(theta, phi) and the tangent basis at that point.
template <class T>
struct OrbitFrame {
  Vec3<T> normal;     // u
  Vec3<T> azimuthal;  // e_theta = du/dtheta / sin(phi)
  Vec3<T> polar;      // e_phi = du/dphi
};

template <class T>
OrbitFrame<T> orbit_frame(const T& theta, const T& phi) {
  using std::cos;
  using std::sin;
  const T st = sin(theta), ct = cos(theta), sp = sin(phi), cp = cos(phi);
  return {{sp * ct, sp * st, cp}, {-st, ct, T(0.0)}, {cp * ct, cp * st, -sp}};
}

template <class T>
Vec3<T> source_position(const Pose<T>& pose, const DetectorSpec& spec) {
  const auto frame = orbit_frame(pose.theta, pose.phi);
  return lift<T>(spec.isocenter) + pose.shift + pose.rho * frame.normal;
}

/// In-plane detector axes (rows, columns) after rolling by gamma. With
/// gamma = 0 rows run along e_phi and columns along e_theta; (rows, columns,
/// normal) is right-handed.
template <class T>
std::pair<Vec3<T>, Vec3<T>> detector_axes(const Pose<T>& pose) {
  using std::cos;
  using std::sin;
  const auto frame = orbit_frame(pose.theta, pose.phi);
  const T cg = cos(pose.gamma), sg = sin(pose.gamma);
  return {cg * frame.polar - sg * frame.azimuthal, cg * frame.azimuthal + sg * frame.polar};
}

/// Detector plane tangent to the sphere of radius rho about the isocenter,
/// opposite the source, so that |source - detector center| = 2 rho.
template <class T>
RaySet<T> detector_grid(const Pose<T>& pose, const DetectorSpec& spec) {
  const auto frame = orbit_frame(pose.theta, pose.phi);
  const auto [rows, cols] = detector_axes(pose);
  const Vec3<T> base = lift<T>(spec.isocenter) + pose.shift;

  RaySet<T> rays;
  rays.height = spec.height;
  rays.width = spec.width;
  rays.source = base + pose.rho * frame.normal;
  const Vec3<T> center = base - pose.rho * frame.normal;
  rays.pixels.reserve(static_cast<std::size_t>(spec.height) * spec.width);
  for (int h = 0; h < spec.height; ++h) {
    const double ah = (h - 0.5 * (spec.height - 1)) * spec.pitch_y;
    const Vec3<T> row = center + T(ah) * rows;
    for (int w = 0; w < spec.width; ++w) {
      const double aw = (w - 0.5 * (spec.width - 1)) * spec.pitch_x;
      rays.pixels.push_back(row + T(aw) * cols);
    }
  }
  return rays;
}

}  // namespace drr
