#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tact/gelsim/gel.hpp"

namespace tact::gelsim {

namespace detail {

// 1D squared distance transform (lower envelope of parabolas).
inline void sqdist_1d(std::vector<double>& f, std::vector<double>& d,
                      std::vector<int>& v, std::vector<double>& z, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

// Exact squared Euclidean distance (px^2) to the nearest set pixel of `mask`.
// Empty cells start at a large finite value; infinities would give NaN
// parabola intersections in the envelope pass.
inline Grid<double> squared_distance_transform(const Grid<std::uint8_t>& mask) {
  constexpr double kFar = 1e12;
  const int w = mask.width();
  const int h = mask.height();
  Grid<double> d(w, h);
  const int n = std::max(w, h);
  std::vector<double> f(n), out(n), z(n + 1);
  std::vector<int> v(n);

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = mask(x, y) ? 0.0 : kFar;
    detail::sqdist_1d(f, out, v, z, h);
    for (int y = 0; y < h; ++y) d(x, y) = out[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = d(x, y);
    detail::sqdist_1d(f, out, v, z, w);
    for (int x = 0; x < w; ++x) d(x, y) = out[x];
  }
  return d;
}

// Redistributes a fraction of the displaced volume as a bulge outside the
// contact region. The bulge kernel decays exponentially with distance to the
// contact boundary; drag shifts the kernel's distance field along the motion
// and twist rotates it about the contact center, so bulge mass accumulates
// ahead of the moving object.
inline ThicknessField flow(const ThicknessField& pre, const GelSpec& gel,
                           const ContactState& contact,
                           const PixelScale& scale) {
  const int w = pre.width();
  const int h = pre.height();
  const double mm_px = scale.mm_per_pixel;
  const double area_px = mm_px * mm_px;

  Grid<std::uint8_t> mask(w, h, std::uint8_t{0});
  double displaced = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double pen = gel.h0 - pre(x, y);
      if (pen > 0.0) {
        mask(x, y) = 1;
        displaced += pen * area_px;
      }
    }
  }
  if (displaced <= 0.0 || gel.flow_fraction <= 0.0) return pre;

  Grid<double> dist = squared_distance_transform(mask);
  for (double& v : dist.data()) v = std::sqrt(v);

  const double drag_mag = std::hypot(contact.drag_x, contact.drag_y);
  double shift_x = 0.0, shift_y = 0.0;
  if (drag_mag > 0.0) {
    const double s_mm = std::min(drag_mag, gel.flow_radius);
    shift_x = s_mm / drag_mag * contact.drag_x / mm_px;
    shift_y = s_mm / drag_mag * contact.drag_y / mm_px;
  }
  const double rot = std::clamp(contact.twist, -0.3, 0.3);
  const bool biased = drag_mag > 0.0 || rot != 0.0;
  const double cos_r = std::cos(-rot);
  const double sin_r = std::sin(-rot);

  Grid<double> weight(w, h, 0.0);
  double wsum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y)) continue;
      double d_px;
      if (!biased) {
        d_px = dist(x, y);
      } else {
        const double dx = (x - shift_x) - contact.center_x;
        const double dy = (y - shift_y) - contact.center_y;
        const double sx = contact.center_x + cos_r * dx - sin_r * dy;
        const double sy = contact.center_y + sin_r * dx + cos_r * dy;
        d_px = sample_bilinear(dist, sx, sy);
      }
      const double wgt = std::exp(-d_px * mm_px / gel.flow_radius);
      weight(x, y) = wgt;
      wsum += wgt * area_px;
    }
  }
  if (wsum <= 0.0) return pre;  // contact covers the whole image

  const double gain = gel.flow_fraction * displaced / wsum;
  ThicknessField out = pre;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] += gain * weight.data()[i];
  return out;
}

}  // namespace tact::gelsim
