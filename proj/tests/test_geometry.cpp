#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <drr/geometry.hpp>
#include <drr/registration.hpp>

#include "fixtures.hpp"

using namespace drr;
using std::numbers::pi;

namespace {

DetectorSpec origin_spec(int h, int w, double pitch) { return {h, w, pitch, pitch, {0, 0, 0}}; }

void expect_vec_near(const Vec3d& a, const Vec3d& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

PoseParameters random_pose(std::mt19937_64& rng) {
  using drr::testing::uniform;
  double phi;
  do phi = uniform(rng, 0.0, pi);
  while (std::abs(std::sin(phi)) < 1e-3);
  return {uniform(rng, 10, 500), uniform(rng, -pi, pi), phi, uniform(rng, -pi, pi),
          {uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -50, 50)}};
}

}  // namespace

TEST(SourcePosition, Examples) {
  const auto spec = origin_spec(1, 1, 1.0);
  expect_vec_near(source_position(PoseParameters{100, 0, pi / 2, 0, {}}, spec), {100, 0, 0}, 1e-12);
  expect_vec_near(source_position(PoseParameters{100, 0, 0, 0, {}}, spec), {0, 0, 100}, 1e-12);
  expect_vec_near(source_position(PoseParameters{100, pi / 2, pi / 2, 0, {1, 2, 3}}, spec), {1, 102, 3}, 1e-12);
}

TEST(SourcePosition, IsocenterOffsetsEverything) {
  DetectorSpec spec = origin_spec(1, 1, 1.0);
  spec.isocenter = {10, 20, 30};
  expect_vec_near(source_position(PoseParameters{5, 0, pi / 2, 0, {}}, spec), {15, 20, 30}, 1e-12);
}

TEST(DetectorGrid, SinglePixelOppositeSource) {
  const auto rays = detector_grid(PoseParameters{100, 0, pi / 2, 0, {}}, origin_spec(1, 1, 1.0));
  expect_vec_near(rays.source, {100, 0, 0}, 1e-12);
  ASSERT_EQ(rays.pixels.size(), 1u);
  expect_vec_near(rays.pixels[0], {-100, 0, 0}, 1e-12);
}

TEST(DetectorGrid, ThreeByThreeAtCanonicalPose) {
  const auto rays = detector_grid(PoseParameters{100, 0, pi / 2, 0, {}}, origin_spec(3, 3, 2.0));
  expect_vec_near(rays.pixel(1, 1), {-100, 0, 0}, 1e-12);
  double max_y = 0, max_z = 0;
  for (const auto& p : rays.pixels) {
    EXPECT_NEAR(p.x, -100.0, 1e-12);
    max_y = std::max(max_y, std::abs(p.y));
    max_z = std::max(max_z, std::abs(p.z));
  }
  EXPECT_NEAR(max_y, 2.0, 1e-12);
  EXPECT_NEAR(max_z, 2.0, 1e-12);
}

TEST(DetectorGrid, QuarterTurnRollMovesCornerPixels) {
  // Rows follow e_phi = (0,0,-1), columns e_theta = (0,1,0) at this pose. A
  // quarter roll maps rows to -e_theta and columns to e_phi, so the first
  // pixel lands where the last column of the first row was.
  const int n = 4;
  const auto spec = origin_spec(n, n, 1.5);
  const auto flat = detector_grid(PoseParameters{100, 0, pi / 2, 0, {}}, spec);
  const auto rolled = detector_grid(PoseParameters{100, 0, pi / 2, pi / 2, {}}, spec);
  expect_vec_near(rolled.pixel(0, 0), flat.pixel(0, n - 1), 1e-12);
  expect_vec_near(flat.pixel(0, 0), {-100, -2.25, 2.25}, 1e-12);
}

TEST(DetectorGrid, PropertySourceDetectorDistanceIsTwoRho) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto pose = random_pose(rng);
    DetectorSpec spec = origin_spec(5, 4, 1.3);
    spec.isocenter = {1, -2, 3};
    const auto rays = detector_grid(pose, spec);
    Vec3d centroid{};
    for (const auto& p : rays.pixels) centroid = centroid + (1.0 / rays.pixels.size()) * p;
    EXPECT_NEAR(norm(rays.source - centroid), 2 * pose.rho, 1e-9 * pose.rho);
    // Detector plane is perpendicular to the central axis.
    const Vec3d axis = centroid - rays.source;
    for (const auto& p : rays.pixels) EXPECT_NEAR(dot(p - centroid, axis), 0.0, 1e-8 * pose.rho);
  }
}

TEST(DetectorGrid, PropertyBasisIsRightHandedOrthonormal) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto pose = random_pose(rng);
    const auto [rows, cols] = detector_axes(pose);
    const auto n = orbit_frame(pose.theta, pose.phi).normal;
    EXPECT_NEAR(dot(rows, rows), 1.0, 1e-14);
    EXPECT_NEAR(dot(cols, cols), 1.0, 1e-14);
    EXPECT_NEAR(dot(n, n), 1.0, 1e-14);
    EXPECT_NEAR(dot(rows, cols), 0.0, 1e-14);
    EXPECT_NEAR(dot(rows, n), 0.0, 1e-14);
    EXPECT_NEAR(dot(cols, n), 0.0, 1e-14);
    expect_vec_near(cross(rows, cols), n, 1e-14);
  }
}

TEST(DetectorGrid, PropertyShiftTranslatesEverything) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto pose = random_pose(rng);
    const Vec3d delta{drr::testing::uniform(rng, -20, 20), drr::testing::uniform(rng, -20, 20),
                      drr::testing::uniform(rng, -20, 20)};
    PoseParameters moved = pose;
    moved.shift = pose.shift + delta;
    const auto spec = origin_spec(3, 2, 0.7);
    const auto a = detector_grid(pose, spec), b = detector_grid(moved, spec);
    expect_vec_near(b.source, a.source + delta, 1e-9);
    for (std::size_t i = 0; i < a.pixels.size(); ++i) expect_vec_near(b.pixels[i], a.pixels[i] + delta, 1e-9);
  }
}

TEST(DetectorGrid, PropertyFullRollIsIdentity) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto pose = random_pose(rng);
    PoseParameters turned = pose;
    turned.gamma += 2 * pi;
    const auto spec = origin_spec(4, 4, 3.0);
    const auto a = detector_grid(pose, spec), b = detector_grid(turned, spec);
    for (std::size_t i = 0; i < a.pixels.size(); ++i) expect_vec_near(a.pixels[i], b.pixels[i], 1e-11 * pose.rho);
  }
}

TEST(DetectorGrid, PoleIsStillWellDefined) {
  const auto rays = detector_grid(PoseParameters{50, 0.3, 0.0, 0.0, {}}, origin_spec(3, 3, 1.0));
  expect_vec_near(rays.source, {0, 0, 50}, 1e-12);
  for (const auto& p : rays.pixels) EXPECT_NEAR(p.z, -50.0, 1e-12);
}

TEST(Pose, VectorRoundTripAndValidation) {
  const PoseParameters p{1, 2, 3, 4, {5, 6, 7}};
  const auto v = to_vector(p);
  for (std::size_t i = 0; i < kPoseParamCount; ++i) EXPECT_EQ(v[i], static_cast<double>(i + 1));
  EXPECT_EQ(to_vector(from_vector(v)), v);
  EXPECT_THROW(validate(PoseParameters{0, 0, 1, 0, {}}), InvalidArgument);
  EXPECT_THROW(validate(PoseParameters{1, std::nan(""), 1, 0, {}}), InvalidArgument);
  EXPECT_THROW(validate(DetectorSpec{0, 1, 1, 1, {}}), InvalidArgument);
}

TEST(Pose, SeededPoseDifferentiatesTheSource) {
  const PoseParameters p{100, 0.3, 1.1, 0.2, {1, 2, 3}};
  const auto s = source_position(seed_pose(p), origin_spec(1, 1, 1.0));
  // ds/drho = u(theta, phi), ds/dbx = e_x
  EXPECT_NEAR(s.x.grad[kRho], std::sin(1.1) * std::cos(0.3), 1e-15);
  EXPECT_NEAR(s.z.grad[kRho], std::cos(1.1), 1e-15);
  EXPECT_EQ(s.x.grad[kShiftX], 1.0);
  EXPECT_EQ(s.y.grad[kShiftX], 0.0);
  EXPECT_EQ(s.x.grad[kGamma], 0.0);
}
