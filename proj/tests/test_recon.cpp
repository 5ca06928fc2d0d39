#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tact/calib/depth_table.hpp"
#include "tact/core/rng.hpp"
#include "tact/gelsim/objects.hpp"
#include "tact/gelsim/session.hpp"
#include "tact/recon/reconstruct.hpp"

using namespace tact;
using namespace tact::recon;

namespace {

const PixelScale kScale(gelsim::kDefaultMmPerPixel);

GrayImage press_image(const gelsim::GelSpec& gel, double ball_radius,
                      double depth, const GrayImage& ref, double cx, double cy) {
  gelsim::ObjectParams p;
  p.radius = ball_radius;
  const auto ball = gelsim::procedural_object(gelsim::ObjectKind::sphere, p, 1);
  gelsim::ContactState c;
  c.press_depth = depth;
  c.center_x = cx;
  c.center_y = cy;
  return gelsim::simulate_contact(gel, ball, c, ref, kScale).tactile;
}

}  // namespace

TEST_CASE("difference image") {
  SECTION("identical frames cancel") {
    const GrayImage ref = gelsim::make_reference(32, 24, 2);
    const DiffImage d = difference(ref, ref);
    for (double v : d.data()) REQUIRE(v == 0.0);
  }
  SECTION("signed per-pixel subtraction") {
    GrayImage ref(1, 1, 0.8), tactile(1, 1, 0.5);
    REQUIRE(difference(ref, tactile)(0, 0) == Catch::Approx(-0.3).margin(1e-15));
  }
  SECTION("antisymmetry") {
    Rng rng(9);
    GrayImage a(16, 12), b(16, 12);
    for (double& v : a.data()) v = uniform_unit(rng);
    for (double& v : b.data()) v = uniform_unit(rng);
    const DiffImage ab = difference(a, b);
    const DiffImage ba = difference(b, a);
    for (std::size_t i = 0; i < ab.size(); ++i)
      REQUIRE(ab.data()[i] == -ba.data()[i]);
  }
  SECTION("dimension mismatch rejected") {
    REQUIRE_THROWS_AS(difference(GrayImage(4, 4, 0.0), GrayImage(5, 4, 0.0)),
                      DimensionError);
  }
}

TEST_CASE("depth reconstruction") {
  gelsim::GelSpec gel;
  const GrayImage ref = gelsim::make_reference(280, 200, 17);
  const GrayImage calib_press = press_image(gel, 4.0, 1.0, ref, 139.5, 99.5);
  const auto table =
      calib::calibrate_depth(ref, calib_press, 4.0, kScale);

  SECTION("zero difference gives a zero depth map") {
    const DepthMap d = reconstruct(DiffImage(64, 48, 0.0), table);
    for (double v : d.data()) REQUIRE(v == 0.0);
  }

  SECTION("bulge-only differences produce no depth") {
    DiffImage bulge(64, 48, 0.0);
    for (int x = 10; x < 30; ++x) bulge(x, 20) = 0.05;  // brighter pixels
    const DepthMap d = reconstruct(bulge, table);
    for (double v : d.data()) REQUIRE(v == 0.0);
  }

  SECTION("closed loop on an unseen smaller ball") {
    const double R = 2.5, depth = 0.8;
    const double cx = 139.5, cy = 99.5;
    const GrayImage tactile = press_image(gel, R, depth, ref, cx, cy);
    const DepthMap recon_depth = reconstruct(difference(ref, tactile), table);

    const double a = std::sqrt(R * R - (R - depth) * (R - depth));
    double err = 0.0;
    long n = 0;
    for (int y = 0; y < 200; ++y)
      for (int x = 0; x < 280; ++x) {
        const double r = std::hypot(x - cx, y - cy) * kScale.mm_per_pixel;
        if (r >= a) continue;
        const double analytic = std::sqrt(R * R - r * r) - (R - depth);
        err += std::abs(recon_depth(x, y) - analytic);
        ++n;
      }
    REQUIRE(n > 500);
    REQUIRE(err / n < 0.05);
  }

  SECTION("max depth is monotone in press depth") {
    double prev = -1.0;
    for (double depth : {0.3, 0.6, 0.9}) {
      const GrayImage tactile = press_image(gel, 2.5, depth, ref, 139.5, 99.5);
      const DepthMap d = reconstruct(difference(ref, tactile), table);
      double peak = 0.0;
      for (double v : d.data()) peak = std::max(peak, v);
      REQUIRE(peak > prev);
      prev = peak;
    }
  }

  SECTION("pipeline is deterministic") {
    const GrayImage tactile = press_image(gel, 2.5, 0.8, ref, 139.5, 99.5);
    const DiffImage diff = difference(ref, tactile);
    REQUIRE(reconstruct(diff, table) == reconstruct(diff, table));
  }
}

TEST_CASE("point clouds") {
  SECTION("zero depth maps to the z = 0 plane") {
    const PointCloud cloud = to_pointcloud(DepthMap(10, 8, 0.0), kScale);
    REQUIRE(cloud.points.size() == 80);
    for (const auto& p : cloud.points) REQUIRE(p[2] == 0.0);
  }
  SECTION("coordinate convention at the center") {
    const PointCloud cloud = to_pointcloud(DepthMap(10, 8, 0.0), kScale);
    // pixel (5, 4) sits at the origin by the width/2 convention
    const auto& p = cloud.points[4 * 10 + 5];
    REQUIRE(p[0] == 0.0);
    REQUIRE(p[1] == 0.0);
  }
  SECTION("full sensor frame gives 158700 points") {
    const PointCloud cloud = to_pointcloud(DepthMap(460, 345, 0.0), kScale);
    REQUIRE(cloud.points.size() == 158700);
  }
  SECTION("round trip by pixel index") {
    Rng rng(5);
    DepthMap d(23, 17);
    for (double& v : d.data()) v = uniform_range(rng, 0.0, 3.0);
    const PointCloud cloud = to_pointcloud(d, kScale);
    for (int y = 0; y < 17; ++y)
      for (int x = 0; x < 23; ++x)
        REQUIRE(cloud.points[static_cast<std::size_t>(y) * 23 + x][2] ==
                d(x, y));
  }
}

TEST_CASE("sphere press evaluation") {
  SECTION("perfect reconstruction scores zero") {
    const double R = 2.5, depth = 0.8, cx = 60, cy = 50;
    const double a = std::sqrt(R * R - (R - depth) * (R - depth));
    DepthMap analytic(120, 100, 0.0);
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 120; ++x) {
        const double r = std::hypot(x - cx, y - cy) * kScale.mm_per_pixel;
        if (r < a) analytic(x, y) = std::sqrt(R * R - r * r) - (R - depth);
      }
    SpherePress press{analytic, R, cx, cy, a / kScale.mm_per_pixel};
    const ReconReport report = eval_sphere_presses({press}, kScale);
    REQUIRE(report.mae_mm == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(report.std_mm == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(report.n_images == 1);
  }
  SECTION("undetectable circles are excluded") {
    SpherePress bad{DepthMap(10, 10, 0.0), 2.5, 5, 5, 0.0};
    REQUIRE_THROWS_AS(eval_sphere_presses({bad}, kScale), CalibrationError);
  }
  SECTION("no presses is an error") {
    REQUIRE_THROWS_AS(eval_sphere_presses({}, kScale), ParameterError);
  }
  SECTION("report serialization") {
    ReconReport report{0.0123, 0.0045, 20};
    const auto path = std::filesystem::temp_directory_path() / "recon_report.json";
    save_report(path, report);
    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in);
    REQUIRE(j.at("mae_mm").get<double>() == 0.0123);
    REQUIRE(j.at("n_images").get<int>() == 20);
  }
}
