#pragma once

#include <cmath>

#include "tact/gelsim/gel.hpp"

namespace tact::gelsim {

// Wrench from the pre-flow penetration field under the elastic-foundation
// model: pressure k_n * penetration, shear k_s * drag over the contact area,
// twist torque from the polar moment, and tilt torques from the pressure
// moments about the contact centroid. Compression is reported as negative
// fz; torques are N·m with lever arms converted from mm.
inline Wrench synthesize_wrench(const DepthMap& penetration, const GelSpec& gel,
                                const ContactState& contact,
                                const PixelScale& scale) {
  const double mm_px = scale.mm_per_pixel;
  const double area_px = mm_px * mm_px;

  double area = 0.0, cx = 0.0, cy = 0.0;
  for (int y = 0; y < penetration.height(); ++y)
    for (int x = 0; x < penetration.width(); ++x)
      if (penetration(x, y) > 0.0) {
        area += area_px;
        cx += x * area_px;
        cy += y * area_px;
      }
  if (area <= 0.0) return Wrench{};
  cx /= area;
  cy /= area;

  double fz_sum = 0.0, tx_sum = 0.0, ty_sum = 0.0, polar = 0.0;
  for (int y = 0; y < penetration.height(); ++y)
    for (int x = 0; x < penetration.width(); ++x) {
      const double p = penetration(x, y);
      if (!(p > 0.0)) continue;
      const double q = gel.k_n * p;          // N/mm^2
      const double fn = q * area_px;         // N
      const double rx = (x - cx) * mm_px;    // mm
      const double ry = (y - cy) * mm_px;
      fz_sum += fn;
      tx_sum += fn * ry;                     // N·mm
      ty_sum -= fn * rx;
      polar += (rx * rx + ry * ry) * area_px;  // mm^4
    }

  Wrench w;
  w.fx = gel.k_s * contact.drag_x * area;
  w.fy = gel.k_s * contact.drag_y * area;
  w.fz = -fz_sum;
  w.tx = tx_sum * 1e-3;  // N·mm -> N·m
  w.ty = ty_sum * 1e-3;
  w.tz = gel.k_s * contact.twist * polar * 1e-3;
  return w;
}

}  // namespace tact::gelsim
