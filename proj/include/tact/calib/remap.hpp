#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tact/core/blobs.hpp"
#include "tact/core/types.hpp"
#include "tact/gelsim/gel.hpp"
#include "tact/io/pfm.hpp"

namespace tact::calib {

struct GridSpec {
  int rows = 5;
  int cols = 5;
  double spacing_mm = 2.0;

  void validate() const {
    if (rows < 3 || cols < 3) throw ParameterError("marker grid must be at least 3x3");
    if (!(spacing_mm > 0.0)) throw ParameterError("grid spacing must be positive");
  }
};

// Per-output-pixel source coordinates in the raw image frame, already
// center-cropped from the raw resolution.
struct RemapField {
  int raw_width = 0, raw_height = 0;
  int crop_origin_x = 0, crop_origin_y = 0;
  Grid<double> map_x, map_y;

  int out_width() const { return map_x.width(); }
  int out_height() const { return map_x.height(); }
};

namespace detail {

// Solves the 3x3 normal equations of rows (1, dc, dr) -> value.
inline std::array<double, 3> solve_grid_axis(
    const std::vector<std::array<double, 3>>& rows_in,
    const std::vector<double>& rhs) {
  double m[3][3] = {};
  double b[3] = {};
  for (std::size_t k = 0; k < rows_in.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      b[i] += rows_in[k][i] * rhs[k];
      for (int j = 0; j < 3; ++j) m[i][j] += rows_in[k][i] * rows_in[k][j];
    }
  }
  // Cramer's rule
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(m);
  if (std::abs(det) < 1e-12)
    throw CalibrationError("degenerate anchor geometry");
  std::array<double, 3> sol;
  for (int col = 0; col < 3; ++col) {
    double t[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t[i][j] = (j == col) ? b[i] : m[i][j];
    sol[col] = det3(t) / det;
  }
  return sol;
}

}  // namespace detail

// The fitted equidistant marker grid: origin at the central marker, one
// column step `u`, one row step `v`.
struct GridModel {
  Point2 origin, u, v;
  double pitch_px = 0.0;

  Point2 position(int row, int col, int center_row, int center_col) const {
    const double dc = col - center_col;
    const double dr = row - center_row;
    return {origin.x + dc * u.x + dr * v.x, origin.y + dc * u.y + dr * v.y};
  }
};

// Sorts detected markers into row-major grid order (rows by y, then x).
inline std::vector<Point2> assign_grid_order(std::vector<Point2> markers,
                                             const GridSpec& grid) {
  std::sort(markers.begin(), markers.end(),
            [](const Point2& a, const Point2& b) { return a.y < b.y; });
  for (int r = 0; r < grid.rows; ++r) {
    auto first = markers.begin() + static_cast<std::ptrdiff_t>(r) * grid.cols;
    std::sort(first, first + grid.cols,
              [](const Point2& a, const Point2& b) { return a.x < b.x; });
  }
  return markers;
}

// Least-squares equidistant grid through the five central markers (the
// center and its four neighbors, the ones with least aberration).
inline GridModel fit_anchor_grid(const std::vector<Point2>& ordered,
                                 const GridSpec& grid) {
  const int rc = grid.rows / 2;
  const int cc = grid.cols / 2;
  const std::array<std::array<int, 2>, 5> anchors = {
      {{rc, cc}, {rc - 1, cc}, {rc + 1, cc}, {rc, cc - 1}, {rc, cc + 1}}};

  std::vector<std::array<double, 3>> rows_m;
  std::vector<double> rhs_x, rhs_y;
  for (const auto& a : anchors) {
    const Point2& p = ordered[static_cast<std::size_t>(a[0]) * grid.cols + a[1]];
    rows_m.push_back({1.0, static_cast<double>(a[1] - cc),
                      static_cast<double>(a[0] - rc)});
    rhs_x.push_back(p.x);
    rhs_y.push_back(p.y);
  }
  const auto sx = detail::solve_grid_axis(rows_m, rhs_x);
  const auto sy = detail::solve_grid_axis(rows_m, rhs_y);

  GridModel model;
  model.origin = {sx[0], sy[0]};
  model.u = {sx[1], sy[1]};
  model.v = {sx[2], sy[2]};
  const double cross = model.u.x * model.v.y - model.u.y * model.v.x;
  const double nu = std::hypot(model.u.x, model.u.y);
  const double nv = std::hypot(model.v.x, model.v.y);
  if (!(nu > 1e-9) || !(nv > 1e-9) || std::abs(cross) < 1e-6 * nu * nv)
    throw CalibrationError("degenerate anchor geometry (collinear markers)");
  model.pitch_px = 0.5 * (nu + nv);
  return model;
}

// Builds the rectifying remap from detected marker centroids: the anchor
// grid is extended to target positions for all markers, the detected-minus-
// target displacement is spread over the image by inverse-distance weighting
// (power 2), and the identity-plus-displacement map is center-cropped.
inline std::pair<RemapField, PixelScale> build_remap(
    const std::vector<Point2>& markers, const GridSpec& grid, int raw_width,
    int raw_height, int out_width = gelsim::kCropWidth,
    int out_height = gelsim::kCropHeight) {
  grid.validate();
  if (static_cast<int>(markers.size()) != grid.rows * grid.cols)
    throw CalibrationError(
        "marker count mismatch: expected " +
        std::to_string(grid.rows * grid.cols) + ", got " +
        std::to_string(markers.size()));
  if (out_width > raw_width || out_height > raw_height)
    throw ParameterError("crop size exceeds raw size");

  const std::vector<Point2> ordered = assign_grid_order(markers, grid);
  const GridModel model = fit_anchor_grid(ordered, grid);
  const int rc = grid.rows / 2;
  const int cc = grid.cols / 2;

  std::vector<Point2> targets(ordered.size());
  std::vector<Point2> disp(ordered.size());
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * grid.cols + c;
      targets[i] = model.position(r, c, rc, cc);
      disp[i] = {ordered[i].x - targets[i].x, ordered[i].y - targets[i].y};
    }

  RemapField remap;
  remap.raw_width = raw_width;
  remap.raw_height = raw_height;
  remap.crop_origin_x = (raw_width - out_width) / 2;
  remap.crop_origin_y = (raw_height - out_height) / 2;
  remap.map_x = Grid<double>(out_width, out_height);
  remap.map_y = Grid<double>(out_width, out_height);

  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const double px = x + remap.crop_origin_x;
      const double py = y + remap.crop_origin_y;
      double wsum = 0.0, dx = 0.0, dy = 0.0;
      bool exact = false;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d2 = (px - targets[i].x) * (px - targets[i].x) +
                          (py - targets[i].y) * (py - targets[i].y);
        if (d2 < 1e-12) {
          dx = disp[i].x;
          dy = disp[i].y;
          exact = true;
          break;
        }
        const double wgt = 1.0 / d2;
        wsum += wgt;
        dx += wgt * disp[i].x;
        dy += wgt * disp[i].y;
      }
      if (!exact) {
        dx /= wsum;
        dy /= wsum;
      }
      remap.map_x(x, y) = px + dx;
      remap.map_y(x, y) = py + dy;
    }
  }
  return {std::move(remap), PixelScale(grid.spacing_mm / model.pitch_px)};
}

// Bilinear resampling at the mapped coordinates; samples outside the raw
// image read as 0. Coordinates within 1e-9 px of a pixel center are read
// directly, so an identity remap crops bit-exactly.
inline GrayImage rectify(const GrayImage& img, const RemapField& remap) {
  if (img.width() != remap.raw_width || img.height() != remap.raw_height)
    throw DimensionError("rectify: image does not match remap raw size");
  GrayImage out(remap.out_width(), remap.out_height());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const double mx = remap.map_x(x, y);
      const double my = remap.map_y(x, y);
      const double rx = std::round(mx);
      const double ry = std::round(my);
      if (std::abs(mx - rx) < 1e-9 && std::abs(my - ry) < 1e-9 &&
          img.in_bounds(static_cast<int>(rx), static_cast<int>(ry)))
        out(x, y) = img(static_cast<int>(rx), static_cast<int>(ry));
      else
        out(x, y) = sample_bilinear_or(img, mx, my, 0.0);
    }
  return out;
}

inline void save_remap(const std::filesystem::path& dir, const RemapField& remap,
                       const PixelScale& scale) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_pfm(dir / "remap_x.pfm", remap.map_x);
  write_pfm(dir / "remap_y.pfm", remap.map_y);
  nlohmann::json header{{"raw_width", remap.raw_width},
                        {"raw_height", remap.raw_height},
                        {"crop_origin", {remap.crop_origin_x, remap.crop_origin_y}},
                        {"out_width", remap.out_width()},
                        {"out_height", remap.out_height()},
                        {"mm_per_pixel", scale.mm_per_pixel}};
  std::ofstream out(dir / "remap.json", std::ios::binary);
  if (!out) throw IoError("cannot write remap header");
  out << header.dump(2) << "\n";
}

inline std::pair<RemapField, PixelScale> load_remap(
    const std::filesystem::path& dir) {
  std::ifstream in(dir / "remap.json", std::ios::binary);
  if (!in) throw IoError("cannot read remap header: " + dir.string());
  nlohmann::json header = nlohmann::json::parse(in);
  RemapField remap;
  remap.raw_width = header.at("raw_width").get<int>();
  remap.raw_height = header.at("raw_height").get<int>();
  remap.crop_origin_x = header.at("crop_origin").at(0).get<int>();
  remap.crop_origin_y = header.at("crop_origin").at(1).get<int>();
  remap.map_x = read_pfm(dir / "remap_x.pfm");
  remap.map_y = read_pfm(dir / "remap_y.pfm");
  return {std::move(remap), PixelScale(header.at("mm_per_pixel").get<double>())};
}

}  // namespace tact::calib
