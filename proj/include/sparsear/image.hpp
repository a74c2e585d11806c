#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sparsear {

/// Row-major 2D grid.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& at(int x, int y) { return values_[index(x, y)]; }
  const T& at(int x, int y) const { return values_[index(x, y)]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using Rgb8 = std::array<std::uint8_t, 3>;

using RgbImage = Grid<Rgb8>;

/// Metric z-depth in meters; 0 marks a pixel without a measurement.
using DepthMap = Grid<double>;

/// Per-pixel boolean stored as bytes (vector<bool> is avoided for speed).
using Mask = Grid<std::uint8_t>;

inline std::size_t count_valid(const DepthMap& depth) {
  std::size_t n = 0;
  for (double d : depth.values()) n += d > 0.0 ? 1 : 0;
  return n;
}

inline double luma(const Rgb8& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

}  // namespace sparsear
