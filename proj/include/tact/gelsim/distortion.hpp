#pragma once

#include <cmath>

#include "tact/core/types.hpp"

namespace tact::gelsim {

// Synthetic radial lens distortion. Each output pixel samples the input at
// radius r * (1 + k1 r^2 + k2 r^4), r normalized by the half-diagonal;
// samples past the image border read as 0. The radial map must be strictly
// increasing over the image or the warp is rejected.
inline GrayImage apply_distortion(const GrayImage& img, double k1, double k2,
                                  double center_x, double center_y) {
  const int w = img.width();
  const int h = img.height();
  const double half_diag = 0.5 * std::hypot(static_cast<double>(w),
                                            static_cast<double>(h));

  double r_max = 0.0;
  for (int cy = 0; cy <= 1; ++cy)
    for (int cx = 0; cx <= 1; ++cx) {
      const double dx = cx * (w - 1) - center_x;
      const double dy = cy * (h - 1) - center_y;
      r_max = std::max(r_max, std::hypot(dx, dy) / half_diag);
    }
  for (double r = 0.0; r <= r_max; r += 1e-3) {
    const double deriv = 1.0 + 3.0 * k1 * r * r + 5.0 * k2 * r * r * r * r;
    if (!(deriv > 0.0))
      throw ParameterError("distortion parameters are not invertible");
  }

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - center_x;
      const double dy = y - center_y;
      const double r = std::hypot(dx, dy) / half_diag;
      const double s = 1.0 + k1 * r * r + k2 * r * r * r * r;
      out(x, y) = sample_bilinear_or(img, center_x + dx * s, center_y + dy * s,
                                     0.0);
    }
  }
  return out;
}

}  // namespace tact::gelsim
