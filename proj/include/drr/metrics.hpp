#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "error.hpp"
#include "image.hpp"

namespace drr {

enum class LossKind { neg_zncc, l2 };

inline LossKind parse_loss_kind(std::string_view name) {
  if (name == "zncc" || name == "neg_zncc") return LossKind::neg_zncc;
  if (name == "l2") return LossKind::l2;
  throw InvalidArgument("unknown loss '" + std::string(name) + "' (expected zncc or l2)");
}

inline const char* to_string(LossKind kind) { return kind == LossKind::neg_zncc ? "zncc" : "l2"; }

namespace detail {

template <class T>
T mean(const BasicImage<T>& image) {
  T sum(0.0);
  for (const auto& v : image.pixels) sum += v;
  return sum / static_cast<double>(image.size());
}

/// Zero (or rounding-level) spread relative to the largest magnitude.
template <class T>
bool is_flat(const BasicImage<T>& image, double sum_sq) {
  double peak = 0.0;
  for (const auto& v : image.pixels) peak = std::max(peak, std::abs(value_of(v)));
  return !(sum_sq > 1e-24 * peak * peak * static_cast<double>(image.size()));
}

}  // namespace detail

/// Zero-normalized cross-correlation (population statistics), in [-1, 1].
/// Either argument may carry derivatives.
template <class A, class B>
auto zncc(const BasicImage<A>& a, const BasicImage<B>& b) {
  using R = std::conditional_t<is_dual<A>::value, A, B>;
  require_same_shape(a, b);
  if (a.size() == 0) throw MetricUndefined("zncc of empty images");
  const A mean_a = detail::mean(a);
  const B mean_b = detail::mean(b);
  R cross(0.0);
  A sq_a(0.0);
  B sq_b(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const A da = a.pixels[i] - mean_a;
    const B db = b.pixels[i] - mean_b;
    cross += da * db;
    sq_a += da * da;
    sq_b += db * db;
  }
  if (detail::is_flat(a, value_of(sq_a)) || detail::is_flat(b, value_of(sq_b)))
    throw MetricUndefined("zncc is undefined for an image with zero variance");
  using std::sqrt;
  return R(cross / sqrt(sq_a * sq_b));
}

/// Euclidean norm of the pixelwise difference.
template <class A, class B>
auto l2(const BasicImage<A>& a, const BasicImage<B>& b) {
  using R = std::conditional_t<is_dual<A>::value, A, B>;
  require_same_shape(a, b);
  R sum(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const R d = a.pixels[i] - b.pixels[i];
    sum += d * d;
  }
  // sqrt is not differentiable at 0; identical images are a minimum, so 0.
  if (value_of(sum) == 0.0) return R(0.0);
  using std::sqrt;
  return R(sqrt(sum));
}

template <class A, class B>
auto loss(const BasicImage<A>& moving, const BasicImage<B>& fixed, LossKind kind) {
  using R = std::conditional_t<is_dual<A>::value, A, B>;
  if (kind == LossKind::neg_zncc) return R(-zncc(moving, fixed));
  return R(l2(moving, fixed));
}

/// Root-mean-square difference after min-max normalizing each image to [0, 1].
inline double rmse_normalized(const Image& a, const Image& b) {
  require_same_shape(a, b);
  auto normalized = [](const Image& img) {
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    if (lo == img.pixels.end() || !(*hi > *lo)) throw MetricUndefined("rmse_normalized is undefined for a constant image");
    Image out(img.height, img.width);
    const double range = *hi - *lo;
    for (std::size_t i = 0; i < img.size(); ++i) out.pixels[i] = (img.pixels[i] - *lo) / range;
    return out;
  };
  const Image na = normalized(a);
  const Image nb = normalized(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < na.size(); ++i) {
    const double d = na.pixels[i] - nb.pixels[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(na.size()));
}

}  // namespace drr
