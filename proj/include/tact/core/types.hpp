#pragma once

#include <array>
#include <cmath>

#include "tact/core/errors.hpp"
#include "tact/core/grid.hpp"

namespace tact {

// Intensities in [0, 1].
using GrayImage = Grid<double>;

// Signed intensity differences in [-1, 1].
using DiffImage = Grid<double>;

// Depths in millimeters, >= 0 (0 = undeformed surface, positive = into the gel).
using DepthMap = Grid<double>;

struct RgbImage {
  Grid<double> r, g, b;

  int width() const { return r.width(); }
  int height() const { return r.height(); }
};

// Physical length on the sensing surface covered by one pixel.
struct PixelScale {
  double mm_per_pixel;

  explicit PixelScale(double mm_per_px) : mm_per_pixel(mm_per_px) {
    if (!(mm_per_pixel > 0.0))
      throw ParameterError("mm_per_pixel must be strictly positive");
  }
};

struct Point2 {
  double x = 0.0, y = 0.0;
};

// 6D force/torque: forces in N, torques in N·m.
struct Wrench {
  double fx = 0.0, fy = 0.0, fz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;

  std::array<double, 6> to_array() const { return {fx, fy, fz, tx, ty, tz}; }

  static Wrench from_array(const std::array<double, 6>& a) {
    return Wrench{a[0], a[1], a[2], a[3], a[4], a[5]};
  }

  bool finite() const {
    for (double v : to_array())
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Wrench& a, const Wrench& b) {
    return a.to_array() == b.to_array();
  }
};

}  // namespace tact
