#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "tact/core/rng.hpp"
#include "tact/gelsim/gel.hpp"

namespace tact::gelsim {

enum class ObjectKind { sphere, cylinder, cone, prism_star, superellipsoid };

inline const char* kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::sphere: return "sphere";
    case ObjectKind::cylinder: return "cylinder";
    case ObjectKind::cone: return "cone";
    case ObjectKind::prism_star: return "prism_star";
    case ObjectKind::superellipsoid: return "superellipsoid";
  }
  return "unknown";
}

// Heightfields are sampled at `mm_per_pixel`; pass the same scale to the
// indentation step.
struct ObjectParams {
  double radius = 4.0;        // footprint radius, mm (sphere/cylinder/cone/star outer)
  double height = 3.0;        // cone height / superellipsoid vertical semi-axis, mm
  int star_points = 5;
  double star_inner_ratio = 0.5;  // inner radius / outer radius
  double exponent = 2.0;          // superellipsoid shape exponent
  double semi_a = 4.0, semi_b = 3.0;  // superellipsoid footprint semi-axes, mm
  double apex_offset = 0.0;   // cone apex offset magnitude from center, mm
  double tilt = 0.0;          // press obliquity: surface slope, mm per mm
  double mm_per_pixel = kDefaultMmPerPixel;
  double margin = 1.0;        // extra grid border beyond the footprint, mm
};

inline void validate_object_params(ObjectKind kind, const ObjectParams& p) {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!(p.mm_per_pixel > 0.0)) throw ParameterError("mm_per_pixel must be positive");
  if (!(std::abs(p.tilt) <= 0.5)) throw ParameterError("tilt out of [-0.5, 0.5]");
  switch (kind) {
    case ObjectKind::sphere:
    case ObjectKind::cylinder:
      if (!in(p.radius, 1.0, 8.0)) throw ParameterError("radius out of [1, 8] mm");
      break;
    case ObjectKind::cone:
      if (!in(p.radius, 1.0, 8.0)) throw ParameterError("radius out of [1, 8] mm");
      if (!(p.height > 0.0)) throw ParameterError("cone height must be positive");
      if (!(std::abs(p.apex_offset) < p.radius))
        throw ParameterError("cone apex offset must stay inside the footprint");
      break;
    case ObjectKind::prism_star:
      if (!in(p.radius, 1.0, 8.0)) throw ParameterError("radius out of [1, 8] mm");
      if (p.star_points < 3 || p.star_points > 9)
        throw ParameterError("star points out of [3, 9]");
      if (!(p.star_inner_ratio > 0.0 && p.star_inner_ratio < 1.0))
        throw ParameterError("star inner ratio out of (0, 1)");
      break;
    case ObjectKind::superellipsoid:
      if (!in(p.exponent, 0.5, 4.0))
        throw ParameterError("superellipsoid exponent out of [0.5, 4]");
      if (!in(p.semi_a, 1.0, 8.0) || !in(p.semi_b, 1.0, 8.0))
        throw ParameterError("superellipsoid semi-axes out of [1, 8] mm");
      if (!(p.height > 0.0)) throw ParameterError("superellipsoid height must be positive");
      break;
  }
}

// Deterministic heightfield for a given (kind, params, seed). The seed fixes
// the in-plane orientation of anisotropic shapes (star, superellipsoid) and
// the direction of a cone's apex offset; it has no effect on rotationally
// symmetric shapes.
inline HeightField procedural_object(ObjectKind kind, const ObjectParams& p,
                                     std::uint64_t seed) {
  validate_object_params(kind, p);
  Rng rng(seed);
  const double rot = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
  const double tilt_angle = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
  const double tilt_x = p.tilt * std::cos(tilt_angle);
  const double tilt_y = p.tilt * std::sin(tilt_angle);

  double extent = p.radius;
  if (kind == ObjectKind::superellipsoid) extent = std::max(p.semi_a, p.semi_b);
  const double half_mm = extent + p.margin;
  const int half_px = static_cast<int>(std::ceil(half_mm / p.mm_per_pixel));
  const int n = 2 * half_px + 1;  // odd: exact center pixel
  const double c = half_px;

  const double cos_r = std::cos(rot);
  const double sin_r = std::sin(rot);
  const double apex_x = p.apex_offset * cos_r;
  const double apex_y = p.apex_offset * sin_r;

  Grid<double> h(n, n, kOutsideHeight);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // mm coordinates in the object frame, rotated by -rot
      const double px = (x - c) * p.mm_per_pixel;
      const double py = (y - c) * p.mm_per_pixel;
      const double ox = px * cos_r + py * sin_r;
      const double oy = -px * sin_r + py * cos_r;
      const double r = std::hypot(px, py);

      switch (kind) {
        case ObjectKind::sphere:
          if (r < p.radius)
            h(x, y) = p.radius - std::sqrt(p.radius * p.radius - r * r);
          break;
        case ObjectKind::cylinder:
          if (r <= p.radius) h(x, y) = 0.0;
          break;
        case ObjectKind::cone:
          if (r <= p.radius)
            h(x, y) = p.height / p.radius * std::hypot(px - apex_x, py - apex_y);
          break;
        case ObjectKind::prism_star: {
          if (r > p.radius) break;
          const double r_in = p.radius * p.star_inner_ratio;
          // boundary radius oscillates linearly between outer and inner
          const double sector = std::numbers::pi / p.star_points;
          double theta = std::fmod(std::atan2(oy, ox), 2.0 * sector);
          if (theta < 0.0) theta += 2.0 * sector;
          const double t = std::abs(theta - sector) / sector;  // 1 at points
          const double boundary = r_in + (p.radius - r_in) * t;
          if (r <= boundary) h(x, y) = 0.0;
          break;
        }
        case ObjectKind::superellipsoid: {
          const double u = std::pow(std::abs(ox) / p.semi_a, p.exponent) +
                           std::pow(std::abs(oy) / p.semi_b, p.exponent);
          if (u <= 1.0)
            h(x, y) = p.height * (1.0 - std::pow(1.0 - u, 1.0 / p.exponent));
          break;
        }
      }
      if (p.tilt != 0.0 && h(x, y) < kOutsideHeight)
        h(x, y) += tilt_x * px + tilt_y * py;
    }
  }

  // an oblique press shifts the lowest point; restore the min-zero anchor
  if (p.tilt != 0.0) {
    double lowest = kOutsideHeight;
    for (double v : h.data())
      if (v < kOutsideHeight) lowest = std::min(lowest, v);
    for (double& v : h.data())
      if (v < kOutsideHeight) v -= lowest;
  }

  HeightField field;
  field.height = std::move(h);
  field.id = std::string(kind_name(kind)) + "-" + std::to_string(seed);
  return field;
}

// Calibration board: a rows x cols array of flat-topped cylinders that
// imprint a grid of virtual markers when pressed.
inline HeightField make_calibration_board(int rows, int cols,
                                          double spacing_mm,
                                          double cylinder_radius_mm,
                                          double mm_per_pixel) {
  if (rows < 3 || cols < 3) throw ParameterError("board must be at least 3x3");
  if (!(spacing_mm > 2.0 * cylinder_radius_mm))
    throw ParameterError("board cylinders overlap");
  const double half_w = 0.5 * (cols - 1) * spacing_mm + cylinder_radius_mm + 1.0;
  const double half_h = 0.5 * (rows - 1) * spacing_mm + cylinder_radius_mm + 1.0;
  const int hx = static_cast<int>(std::ceil(half_w / mm_per_pixel));
  const int hy = static_cast<int>(std::ceil(half_h / mm_per_pixel));
  const int nx = 2 * hx + 1;
  const int ny = 2 * hy + 1;

  Grid<double> h(nx, ny, kOutsideHeight);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const double px = (x - hx) * mm_per_pixel;
      const double py = (y - hy) * mm_per_pixel;
      for (int r = 0; r < rows && h(x, y) > 0.0; ++r)
        for (int c = 0; c < cols; ++c) {
          const double cx = (c - 0.5 * (cols - 1)) * spacing_mm;
          const double cy = (r - 0.5 * (rows - 1)) * spacing_mm;
          if (std::hypot(px - cx, py - cy) <= cylinder_radius_mm) {
            h(x, y) = 0.0;
            break;
          }
        }
    }

  HeightField field;
  field.height = std::move(h);
  field.id = "calibration-board";
  return field;
}

// Draws a varied pool of objects with seeded parameters. Tilted presses,
// odd stars and offset-apex cones give the pool asymmetric penetration
// profiles, so the normal-pressure moments and twist visibility are
// exercised across the dataset.
inline std::vector<HeightField> make_object_pool(int count, std::uint64_t seed,
                                                 double mm_per_pixel) {
  std::vector<HeightField> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(seed + 1000003ULL * i);
    ObjectParams p;
    p.mm_per_pixel = mm_per_pixel;
    p.tilt = uniform_range(rng, 0.05, 0.3);
    const auto kind = static_cast<ObjectKind>(i % 5);
    switch (kind) {
      case ObjectKind::sphere:
        p.radius = uniform_range(rng, 2.0, 5.0);
        break;
      case ObjectKind::cylinder:
        p.radius = uniform_range(rng, 1.5, 4.0);
        break;
      case ObjectKind::cone:
        p.radius = uniform_range(rng, 2.5, 5.0);
        p.height = uniform_range(rng, 1.5, 3.0);
        p.apex_offset = uniform_range(rng, 0.3, 0.6) * p.radius;
        break;
      case ObjectKind::prism_star:
        p.radius = uniform_range(rng, 2.5, 5.0);
        p.star_points = 3 + static_cast<int>(uniform_index(rng, 7));
        p.star_inner_ratio = uniform_range(rng, 0.35, 0.6);
        break;
      case ObjectKind::superellipsoid:
        p.semi_a = uniform_range(rng, 2.0, 5.0);
        p.semi_b = uniform_range(rng, 1.5, 4.0);
        p.exponent = uniform_range(rng, 0.8, 4.0);
        p.height = uniform_range(rng, 1.5, 3.0);
        break;
    }
    auto obj = procedural_object(kind, p, seed + 7777ULL * i);
    obj.id = std::string(kind_name(kind)) + "-" + std::to_string(i);
    pool.push_back(std::move(obj));
  }
  return pool;
}

}  // namespace tact::gelsim
