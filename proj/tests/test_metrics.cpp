#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <drr/metrics.hpp>

#include "fixtures.hpp"

using namespace drr;
using drr::testing::uniform;

namespace {

Image make(int h, int w, std::vector<double> px) {
  Image img(h, w);
  img.pixels = std::move(px);
  return img;
}

Image random_image(std::mt19937_64& rng, int h, int w) {
  Image img(h, w);
  for (auto& p : img.pixels) p = uniform(rng, -3, 7);
  return img;
}

// Textbook Pearson correlation in long double.
double pearson(const Image& a, const Image& b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a.pixels[i];
    mb += b.pixels[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double c = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += (a.pixels[i] - ma) * (b.pixels[i] - mb);
    va += (a.pixels[i] - ma) * (a.pixels[i] - ma);
    vb += (b.pixels[i] - mb) * (b.pixels[i] - mb);
  }
  return static_cast<double>(c / std::sqrt(va * vb));
}

}  // namespace

TEST(Zncc, Examples) {
  const auto a = make(2, 2, {1, 2, 3, 4});
  EXPECT_NEAR(zncc(a, a), 1.0, 1e-15);
  EXPECT_NEAR(zncc(a, make(2, 2, {4, 3, 2, 1})), -1.0, 1e-15);
  EXPECT_NEAR(zncc(a, make(2, 2, {10, 20, 30, 40})), 1.0, 1e-15);
  EXPECT_NEAR(zncc(a, make(2, 2, {1, -1, -1, 1})), 0.0, 1e-15);
}

TEST(Zncc, FlatImageIsUndefined) {
  const auto a = make(2, 2, {1, 2, 3, 4});
  const auto flat = make(2, 2, {5, 5, 5, 5});
  EXPECT_THROW(zncc(a, flat), MetricUndefined);
  EXPECT_THROW(zncc(flat, a), MetricUndefined);
  EXPECT_THROW(zncc(Image(2, 2), Image(2, 2)), MetricUndefined);
  EXPECT_THROW(loss(flat, a, LossKind::neg_zncc), MetricUndefined);
}

TEST(Zncc, ShapeMismatchThrows) {
  EXPECT_THROW(zncc(Image(2, 3), Image(3, 2)), InvalidArgument);
  EXPECT_THROW(l2(Image(2, 3), Image(3, 2)), InvalidArgument);
}

TEST(Zncc, PropertyMatchesReferenceAndInvariances) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const int h = 1 + static_cast<int>(rng() % 12), w = 2 + static_cast<int>(rng() % 12);
    const auto a = random_image(rng, h, w), b = random_image(rng, h, w);
    const double z = zncc(a, b);
    EXPECT_NEAR(z, pearson(a, b), 1e-12);
    EXPECT_LE(std::abs(z), 1.0 + 1e-12);
    EXPECT_NEAR(zncc(b, a), z, 1e-14);
    EXPECT_NEAR(zncc(a, a), 1.0, 1e-12);

    const double scale = uniform(rng, 0.1, 10), offset = uniform(rng, -50, 50);
    Image affine = a;
    for (auto& p : affine.pixels) p = scale * p + offset;
    EXPECT_NEAR(zncc(affine, b), z, 1e-10);
    for (auto& p : affine.pixels) p = -p;
    EXPECT_NEAR(zncc(affine, b), -z, 1e-10);
  }
}

TEST(L2, Examples) {
  EXPECT_DOUBLE_EQ(l2(make(1, 2, {0, 0}), make(1, 2, {3, 4})), 5.0);
  EXPECT_EQ(l2(make(1, 2, {1, 2}), make(1, 2, {1, 2})), 0.0);
}

TEST(L2, PropertyMetric) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_image(rng, 5, 7), b = random_image(rng, 5, 7), c = random_image(rng, 5, 7);
    EXPECT_EQ(l2(a, b), l2(b, a));
    EXPECT_GE(l2(a, b), 0.0);
    EXPECT_LE(l2(a, c), l2(a, b) + l2(b, c) + 1e-12);
  }
}

TEST(Loss, SignConventions) {
  const auto a = make(2, 2, {1, 2, 3, 4}), b = make(2, 2, {1, 3, 2, 5});
  EXPECT_EQ(loss(a, b, LossKind::neg_zncc), -zncc(a, b));
  EXPECT_EQ(loss(a, b, LossKind::l2), l2(a, b));
  EXPECT_EQ(parse_loss_kind("zncc"), LossKind::neg_zncc);
  EXPECT_EQ(parse_loss_kind("l2"), LossKind::l2);
  EXPECT_THROW(parse_loss_kind("mse"), InvalidArgument);
}

// Derivatives through the metric, against difference quotients of the
// double-valued metric along each seeded pixel direction.
TEST(Loss, DualDerivativesMatchDifferences) {
  std::mt19937_64 rng(47);
  const auto a = random_image(rng, 3, 4), fixed = random_image(rng, 3, 4);
  std::array<Image, 2> dirs{random_image(rng, 3, 4), random_image(rng, 3, 4)};
  BasicImage<Dual<2>> moving(3, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    moving.pixels[i].value = a.pixels[i];
    moving.pixels[i].grad = {dirs[0].pixels[i], dirs[1].pixels[i]};
  }
  for (LossKind kind : {LossKind::neg_zncc, LossKind::l2}) {
    const auto d = loss(moving, fixed, kind);
    EXPECT_EQ(d.value, loss(a, fixed, kind));
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6;
      Image plus = a, minus = a;
      for (std::size_t i = 0; i < a.size(); ++i) {
        plus.pixels[i] += h * dirs[k].pixels[i];
        minus.pixels[i] -= h * dirs[k].pixels[i];
      }
      const double fd = (loss(plus, fixed, kind) - loss(minus, fixed, kind)) / (2 * h);
      EXPECT_NEAR(d.grad[k], fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(L2, IdenticalDualImagesHaveZeroGradient) {
  BasicImage<Dual<1>> moving(1, 3);
  for (int i = 0; i < 3; ++i) moving.pixels[i] = Dual<1>::variable(i + 1.0, 0);
  const auto r = l2(moving, make(1, 3, {1, 2, 3}));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.grad[0], 0.0);
}

TEST(RmseNormalized, Examples) {
  const auto a = make(1, 4, {0, 1, 2, 3});
  EXPECT_EQ(rmse_normalized(a, a), 0.0);
  auto scaled = a;
  for (auto& p : scaled.pixels) p = 10 * p + 4;
  EXPECT_NEAR(rmse_normalized(a, scaled), 0.0, 1e-15);
  EXPECT_NEAR(rmse_normalized(a, make(1, 4, {3, 2, 1, 0})), std::sqrt((1 + 1.0 / 9 + 1.0 / 9 + 1) / 4), 1e-15);
  EXPECT_THROW(rmse_normalized(a, make(1, 4, {2, 2, 2, 2})), MetricUndefined);
}
