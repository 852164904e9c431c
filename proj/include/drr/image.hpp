#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dual.hpp"
#include "error.hpp"

namespace drr {

/// Row-major H x W grid of pixel intensities.
template <class T>
struct BasicImage {
  int height = 0;
  int width = 0;
  std::vector<T> pixels;

  BasicImage() = default;
  BasicImage(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, T(0.0)) {}

  std::size_t size() const noexcept { return pixels.size(); }
  T& at(int h, int w) { return pixels[static_cast<std::size_t>(h) * width + w]; }
  const T& at(int h, int w) const { return pixels[static_cast<std::size_t>(h) * width + w]; }
};

using Image = BasicImage<double>;

template <class T>
Image value_of(const BasicImage<T>& image) {
  Image out(image.height, image.width);
  for (std::size_t i = 0; i < image.size(); ++i) out.pixels[i] = value_of(image.pixels[i]);
  return out;
}

template <class A, class B>
void require_same_shape(const BasicImage<A>& a, const BasicImage<B>& b) {
  if (a.height != b.height || a.width != b.width)
    throw InvalidArgument("image dimensions differ: " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                          " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
}

}  // namespace drr
