#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "tact/core/blobs.hpp"
#include "tact/core/types.hpp"

namespace tact::calib {

// Monotone lookup from intensity drop to indentation depth. Bin i covers
// drops [i*bin_width, (i+1)*bin_width); lookups interpolate between bin
// centers.
struct IntensityDepthTable {
  double bin_width = 1.0 / 255.0;
  std::vector<double> depths;  // mm per bin, non-decreasing, depths[0] == 0
  double max_drop = 0.0;       // center of the last bin

  double bin_center(std::size_t i) const { return (i + 0.5) * bin_width; }

  void validate() const {
    if (!(bin_width > 0.0)) throw ParameterError("bin_width must be positive");
    if (depths.empty()) throw CalibrationError("empty depth table");
    if (depths.front() != 0.0)
      throw CalibrationError("depth table must anchor at zero");
    for (std::size_t i = 1; i < depths.size(); ++i)
      if (depths[i] < depths[i - 1])
        throw CalibrationError("depth table must be non-decreasing");
  }
};

// drop <= 0 maps to 0; drop beyond the last bin center clamps to the
// deepest calibrated depth.
inline double lookup_depth(const IntensityDepthTable& table, double drop) {
  if (drop <= 0.0 || table.depths.empty()) return 0.0;
  if (drop >= table.max_drop) return table.depths.back();
  const double pos = drop / table.bin_width - 0.5;
  if (pos <= 0.0) return table.depths.front();
  const std::size_t i = static_cast<std::size_t>(pos);
  const double frac = pos - i;
  return table.depths[i] + frac * (table.depths[i + 1] - table.depths[i]);
}

namespace detail {

// Pool-adjacent-violators: weighted isotonic (non-decreasing) regression.
inline void isotonic_fit(std::vector<double>& values,
                         const std::vector<double>& weights) {
  struct Block {
    double mean, weight;
    int count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.count += b.count;
    }
  }
  std::size_t i = 0;
  for (const Block& b : blocks)
    for (int k = 0; k < b.count; ++k) values[i++] = b.mean;
}

}  // namespace detail

struct DepthCalibOptions {
  double blob_threshold = 0.05;  // coarse contact-disk detection
  int blob_min_area = 20;
  // Pixels this far above zero drop count toward the refined contact disk;
  // keeping it a fraction of a bin keeps the radius estimate unbiased.
  double refine_threshold_bins = 0.25;
};

// Single-image depth calibration from one spherical press: the contact disk
// fixes the sphere pose, every pixel inside gets an analytic depth, and
// averaging depth per intensity-drop bin (with isotonic cleanup and gap
// interpolation) yields the monotone lookup table.
inline IntensityDepthTable calibrate_depth(const GrayImage& ref,
                                           const GrayImage& ball_press,
                                           double ball_radius_mm,
                                           const PixelScale& scale,
                                           double bin_width = 1.0 / 255.0,
                                           const DepthCalibOptions& opt = {}) {
  require_same_size(ref, ball_press, "calibrate_depth");
  if (!(bin_width > 0.0)) throw ParameterError("bin_width must be positive");
  if (!(ball_radius_mm > 0.0)) throw ParameterError("ball radius must be positive");

  const int w = ref.width();
  const int h = ref.height();
  DiffImage diff(w, h);
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff.data()[i] = ball_press.data()[i] - ref.data()[i];
  auto drop = [&](int x, int y) { return -diff(x, y); };

  const std::vector<Blob> blobs =
      detect_blobs(diff, opt.blob_threshold, opt.blob_min_area);
  if (blobs.empty()) throw CalibrationError("no contact disk found");
  const Blob& coarse =
      *std::max_element(blobs.begin(), blobs.end(),
                        [](const Blob& a, const Blob& b) { return a.area < b.area; });

  // Refine the disk with a near-zero threshold so the estimated radius
  // reaches the true contact boundary, then recentre on the refined mass.
  const double refine_thr = opt.refine_threshold_bins * bin_width;
  const int sx = std::clamp(static_cast<int>(std::lround(coarse.centroid_x)), 0, w - 1);
  const int sy = std::clamp(static_cast<int>(std::lround(coarse.centroid_y)), 0, h - 1);
  if (!(drop(sx, sy) > refine_thr))
    throw CalibrationError("contact disk centre shows no intensity drop");

  std::vector<std::uint8_t> in_disk(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> stack{sy * w + sx};
  in_disk[static_cast<std::size_t>(sy) * w + sx] = 1;
  long area = 0;
  double wsum = 0.0, cx = 0.0, cy = 0.0;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    const int x = i % w;
    const int y = i / w;
    const double d = drop(x, y);
    ++area;
    wsum += d;
    cx += d * x;
    cy += d * y;
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int n = 0; n < 4; ++n) {
      if (nx[n] < 0 || nx[n] >= w || ny[n] < 0 || ny[n] >= h) continue;
      const std::size_t ni = static_cast<std::size_t>(ny[n]) * w + nx[n];
      if (in_disk[ni] || !(drop(nx[n], ny[n]) > refine_thr)) continue;
      in_disk[ni] = 1;
      stack.push_back(static_cast<int>(ni));
    }
  }
  cx /= wsum;
  cy /= wsum;

  const double r_c = std::sqrt(static_cast<double>(area) / std::numbers::pi);
  const double contact_radius_mm = r_c * scale.mm_per_pixel;
  const double R = ball_radius_mm;
  if (contact_radius_mm >= R)
    throw GeometryError("contact radius reaches the ball radius (over-press)");
  const double d0 = R - std::sqrt(R * R - contact_radius_mm * contact_radius_mm);

  // Average analytic sphere depth per intensity-drop bin.
  std::vector<double> sums, counts;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r_mm = std::hypot(x - cx, y - cy) * scale.mm_per_pixel;
      if (r_mm >= contact_radius_mm) continue;
      const double d = drop(x, y);
      if (!(d > 0.0)) continue;
      const double depth = std::sqrt(R * R - r_mm * r_mm) - (R - d0);
      const std::size_t bin = static_cast<std::size_t>(d / bin_width);
      if (bin >= sums.size()) {
        sums.resize(bin + 1, 0.0);
        counts.resize(bin + 1, 0.0);
      }
      sums[bin] += depth;
      counts[bin] += 1.0;
    }
  }
  if (sums.empty()) throw CalibrationError("no pixels with positive drop inside disk");

  std::vector<double> depths(sums.size(), 0.0);
  std::vector<double> weights(sums.size(), 0.0);
  for (std::size_t i = 0; i < sums.size(); ++i)
    if (counts[i] > 0.0) {
      depths[i] = sums[i] / counts[i];
      weights[i] = counts[i];
    }

  // Isotonic pass over populated bins only.
  std::vector<double> pop_vals;
  std::vector<double> pop_wts;
  std::vector<std::size_t> pop_idx;
  for (std::size_t i = 0; i < depths.size(); ++i)
    if (weights[i] > 0.0) {
      pop_vals.push_back(depths[i]);
      pop_wts.push_back(weights[i]);
      pop_idx.push_back(i);
    }
  detail::isotonic_fit(pop_vals, pop_wts);
  for (std::size_t k = 0; k < pop_idx.size(); ++k) depths[pop_idx[k]] = pop_vals[k];

  // Fill gaps by linear interpolation between populated neighbours; bins
  // before the first populated one ramp up from the zero anchor.
  std::size_t prev = 0;
  double prev_val = 0.0;
  bool have_prev = false;
  for (std::size_t k = 0; k < pop_idx.size(); ++k) {
    const std::size_t cur = pop_idx[k];
    const double cur_val = depths[cur];
    const std::size_t from = have_prev ? prev + 1 : 0;
    const double base = have_prev ? prev_val : 0.0;
    const double span = static_cast<double>(cur - (have_prev ? prev : 0));
    for (std::size_t i = from; i < cur; ++i) {
      const double t = static_cast<double>(i - (have_prev ? prev : 0)) / span;
      depths[i] = base + t * (cur_val - base);
    }
    prev = cur;
    prev_val = cur_val;
    have_prev = true;
  }

  IntensityDepthTable table;
  table.bin_width = bin_width;
  table.depths = std::move(depths);
  table.depths.front() = 0.0;
  table.max_drop = table.bin_center(table.depths.size() - 1);
  table.validate();
  return table;
}

inline void save_table(const std::filesystem::path& path,
                       const IntensityDepthTable& table) {
  nlohmann::json j{{"bin_width", table.bin_width},
                   {"depths", table.depths},
                   {"max_drop", table.max_drop}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write depth table: " + path.string());
  out << j.dump(2) << "\n";
}

inline IntensityDepthTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read depth table: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  IntensityDepthTable table;
  table.bin_width = j.at("bin_width").get<double>();
  table.depths = j.at("depths").get<std::vector<double>>();
  table.max_drop = j.at("max_drop").get<double>();
  table.validate();
  return table;
}

}  // namespace tact::calib
