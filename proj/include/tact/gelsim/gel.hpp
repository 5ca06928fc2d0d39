#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "tact/core/errors.hpp"
#include "tact/core/rng.hpp"
#include "tact/core/types.hpp"

namespace tact::gelsim {

// Per-pixel gel thickness in mm, strictly positive; equals the base
// thickness everywhere when nothing touches the surface.
using ThicknessField = Grid<double>;

// Intensity response of the translucent gel: contact thinning darkens,
// flow bulging brightens, both saturating exponentials.
struct OpticalModel {
  double i_drop_max = 0.6;  // max intensity drop, <= min reference intensity
  double lambda_d = 1.5;    // darkening decay length, mm
  double i_rise_max = 0.15; // max intensity rise
  double lambda_b = 2.0;    // brightening decay length, mm

  void validate() const {
    if (!(i_drop_max > 0.0 && i_drop_max <= 1.0) || !(lambda_d > 0.0) ||
        !(i_rise_max > 0.0 && i_rise_max <= 1.0) || !(lambda_b > 0.0))
      throw ParameterError("optical model parameters must be positive");
  }
};

// Winkler elastic foundation: pressure locally proportional to penetration.
struct GelSpec {
  double h0 = 5.0;            // base gel thickness, mm
  double k_n = 0.04;          // normal stiffness, N/mm^3
  double k_s = 0.02;          // shear stiffness, N/mm^3
  double flow_radius = 2.0;   // bulge redistribution decay length, mm
  double flow_fraction = 0.6; // displaced volume fraction reappearing as bulge
  OpticalModel optics;

  void validate() const {
    if (!(h0 > 0.0) || !(k_n > 0.0) || !(k_s > 0.0) || !(flow_radius > 0.0))
      throw ParameterError("gel constants must be strictly positive");
    if (!(flow_fraction >= 0.0 && flow_fraction <= 1.0))
      throw ParameterError("flow_fraction must lie in [0, 1]");
    optics.validate();
  }
};

// Object surface height above its lowest point, mm; min over the grid is 0.
// Pixels outside the object's silhouette carry a large finite height so
// they never reach the gel.
struct HeightField {
  Grid<double> height;
  std::string id;

  int width() const { return height.width(); }
  int height_px() const { return height.height(); }
};

// Height assigned outside an object's footprint; far beyond any press depth.
inline constexpr double kOutsideHeight = 100.0;

struct ContactState {
  double press_depth = 0.0;       // mm, lowest object point below surface
  double drag_x = 0.0, drag_y = 0.0;  // mm
  double twist = 0.0;             // rad
  double center_x = 0.0, center_y = 0.0;  // pixels
};

// Default sensing geometry: 24 mm across 460 cropped pixels.
inline constexpr int kRawWidth = 640;
inline constexpr int kRawHeight = 480;
inline constexpr int kCropWidth = 460;
inline constexpr int kCropHeight = 345;
inline constexpr double kDefaultMmPerPixel = 24.0 / 460.0;

// No-contact camera view: a mid-gray base with seeded low-frequency shading.
inline GrayImage make_reference(int width, int height, std::uint64_t seed,
                                double base = 0.75, double amplitude = 0.05) {
  Rng rng(seed);
  constexpr int kWaves = 3;
  double angle[kWaves], phase[kWaves], freq[kWaves];
  for (int i = 0; i < kWaves; ++i) {
    angle[i] = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
    phase[i] = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
    // Wavelengths of 1-2 image widths keep the shading low-frequency.
    freq[i] = 2.0 * std::numbers::pi / (width * uniform_range(rng, 1.0, 2.0));
  }
  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWaves; ++i) {
        const double u = x * std::cos(angle[i]) + y * std::sin(angle[i]);
        s += std::cos(freq[i] * u + phase[i]);
      }
      img(x, y) = base + amplitude * (s / kWaves);
    }
  }
  return img;
}

}  // namespace tact::gelsim
