#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tact/calib/depth_table.hpp"
#include "tact/core/gaussian.hpp"
#include "tact/core/types.hpp"

namespace tact::recon {

// Signed tactile-minus-reference intensity.
inline DiffImage difference(const GrayImage& ref, const GrayImage& tactile) {
  require_same_size(ref, tactile, "difference");
  DiffImage out(ref.width(), ref.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = tactile.data()[i] - ref.data()[i];
  return out;
}

struct ReconParams {
  double sigma1 = 2.0;
  int radius1 = 5;
  double sigma2 = 1.0;
  int radius2 = 2;
};

// Depth from the darkening side of the difference image, then two Gaussian
// passes to denoise. Brightened (bulge) pixels never produce depth.
inline DepthMap reconstruct(const DiffImage& diff,
                            const calib::IntensityDepthTable& table,
                            const ReconParams& params = {}) {
  table.validate();
  DepthMap depth(diff.width(), diff.height());
  for (std::size_t i = 0; i < depth.size(); ++i)
    depth.data()[i] = calib::lookup_depth(table, -diff.data()[i]);
  depth = gaussian_blur(depth, params.sigma1, params.radius1);
  depth = gaussian_blur(depth, params.sigma2, params.radius2);
  return depth;
}

// One point per pixel, sensor frame: origin at the image center, x right,
// y down, z positive into the gel, all in mm.
struct PointCloud {
  std::vector<std::array<double, 3>> points;
};

inline PointCloud to_pointcloud(const DepthMap& depth, const PixelScale& scale) {
  PointCloud cloud;
  cloud.points.reserve(depth.size());
  const double s = scale.mm_per_pixel;
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      cloud.points.push_back({(x - depth.width() / 2.0) * s,
                              (y - depth.height() / 2.0) * s, depth(x, y)});
  return cloud;
}

struct ReconReport {
  double mae_mm = 0.0;
  double std_mm = 0.0;
  int n_images = 0;
};

// One evaluated spherical press: the reconstructed depth and the contact
// circle detected on the same frame.
struct SpherePress {
  DepthMap reconstructed;
  double ball_radius_mm = 0.0;
  double center_x = 0.0, center_y = 0.0;  // px
  double contact_radius_px = 0.0;
};

// Depth accuracy against the analytic spherical cap implied by each detected
// contact circle; errors are pooled over the pixels inside the circles.
inline ReconReport eval_sphere_presses(const std::vector<SpherePress>& presses,
                                       const PixelScale& scale) {
  if (presses.empty()) throw ParameterError("no presses to evaluate");
  std::vector<double> abs_errors;
  int used = 0;
  for (const SpherePress& press : presses) {
    const double R = press.ball_radius_mm;
    const double a_mm = press.contact_radius_px * scale.mm_per_pixel;
    if (!(a_mm > 0.0) || a_mm >= R) continue;  // undetectable circle: skip
    const double d0 = R - std::sqrt(R * R - a_mm * a_mm);
    ++used;
    for (int y = 0; y < press.reconstructed.height(); ++y)
      for (int x = 0; x < press.reconstructed.width(); ++x) {
        const double r_mm =
            std::hypot(x - press.center_x, y - press.center_y) *
            scale.mm_per_pixel;
        if (r_mm >= a_mm) continue;
        const double analytic = std::sqrt(R * R - r_mm * r_mm) - (R - d0);
        abs_errors.push_back(std::abs(press.reconstructed(x, y) - analytic));
      }
  }
  if (abs_errors.empty())
    throw CalibrationError("no evaluable contact pixels across presses");

  double mean = 0.0;
  for (double e : abs_errors) mean += e;
  mean /= abs_errors.size();
  double var = 0.0;
  for (double e : abs_errors) var += (e - mean) * (e - mean);
  var /= abs_errors.size();

  ReconReport report;
  report.mae_mm = mean;
  report.std_mm = std::sqrt(var);
  report.n_images = used;
  return report;
}

inline void save_report(const std::filesystem::path& path,
                        const ReconReport& report) {
  nlohmann::json j{{"mae_mm", report.mae_mm},
                   {"std_mm", report.std_mm},
                   {"n_images", report.n_images}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace tact::recon
