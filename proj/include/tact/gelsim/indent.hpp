#pragma once

#include <cmath>

#include "tact/gelsim/gel.hpp"

namespace tact::gelsim {

// Penetration of the object into the undeformed surface, mm, >= 0 per pixel.
// The object is placed with its lowest point `press_depth` below the surface
// at `contact.center`, rotated in-plane by `contact.twist`.
inline DepthMap penetration_field(const GelSpec& gel, const HeightField& obj,
                                  const ContactState& contact,
                                  const PixelScale& scale, int width,
                                  int height) {
  (void)scale;  // object grids share the sensor pixel scale
  if (!(contact.press_depth >= 0.0))
    throw ParameterError("press_depth must be >= 0");
  if (contact.press_depth >= gel.h0)
    throw GeometryError("punch-through: press_depth >= gel thickness");

  DepthMap p(width, height, 0.0);
  if (contact.press_depth == 0.0) return p;

  const double obj_cx = (obj.width() - 1) / 2.0;
  const double obj_cy = (obj.height_px() - 1) / 2.0;
  const double cos_t = std::cos(-contact.twist);
  const double sin_t = std::sin(-contact.twist);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - contact.center_x;
      const double dy = y - contact.center_y;
      const double ox = obj_cx + cos_t * dx - sin_t * dy;
      const double oy = obj_cy + sin_t * dx + cos_t * dy;
      const double h = sample_bilinear_or(obj.height, ox, oy, kOutsideHeight);
      const double pen = contact.press_depth - h;
      if (pen > 0.0) p(x, y) = pen;
    }
  }
  return p;
}

// Gel thickness after indentation, before any flow redistribution.
inline ThicknessField indent(const GelSpec& gel, const HeightField& obj,
                             const ContactState& contact,
                             const PixelScale& scale, int width, int height) {
  const DepthMap p = penetration_field(gel, obj, contact, scale, width, height);
  ThicknessField t(width, height, gel.h0);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = gel.h0 - p.data()[i];
  return t;
}

}  // namespace tact::gelsim
