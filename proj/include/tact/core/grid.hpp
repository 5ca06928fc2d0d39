#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tact/core/errors.hpp"

namespace tact {

// Dense row-major rectangular grid. Pixel (x, y) = (column, row).
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw DimensionError("grid dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0)
      throw DimensionError("grid dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height)
      throw DimensionError("grid data length does not match dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[idx(x, y)]; }
  const T& operator()(int x, int y) const { return data_[idx(x, y)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_size(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <typename T>
void require_same_size(const Grid<T>& a, const Grid<T>& b, const char* what) {
  if (!a.same_size(b))
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
}

// Bilinear sample with edge replication outside the grid.
inline double sample_bilinear(const Grid<double>& g, double x, double y) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(g.width() - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(g.height() - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const double top = g(x0, y0) * (1.0 - fx) + g(x1, y0) * fx;
  const double bot = g(x0, y1) * (1.0 - fx) + g(x1, y1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

// Bilinear sample returning `outside` for coordinates past the last pixel.
inline double sample_bilinear_or(const Grid<double>& g, double x, double y,
                                 double outside) {
  if (x < 0.0 || y < 0.0 || x > g.width() - 1.0 || y > g.height() - 1.0)
    return outside;
  return sample_bilinear(g, x, y);
}

}  // namespace tact
