#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "tact/core/rng.hpp"
#include "tact/gelsim/distortion.hpp"
#include "tact/gelsim/flow.hpp"
#include "tact/gelsim/indent.hpp"
#include "tact/gelsim/objects.hpp"
#include "tact/gelsim/render.hpp"
#include "tact/gelsim/session.hpp"
#include "tact/gelsim/wrench.hpp"

using namespace tact;
using namespace tact::gelsim;

namespace {

const PixelScale kScale(kDefaultMmPerPixel);

ContactState centered_press(double depth, double cx, double cy) {
  ContactState c;
  c.press_depth = depth;
  c.center_x = cx;
  c.center_y = cy;
  return c;
}

}  // namespace

TEST_CASE("procedural objects") {
  SECTION("sphere height matches the analytic cap") {
    ObjectParams p;
    p.radius = 4.0;
    const HeightField obj = procedural_object(ObjectKind::sphere, p, 7);
    const double c = (obj.width() - 1) / 2.0;
    for (int y = 0; y < obj.height_px(); ++y)
      for (int x = 0; x < obj.width(); ++x) {
        const double r = std::hypot(x - c, y - c) * p.mm_per_pixel;
        if (r < p.radius) {
          const double expect = p.radius - std::sqrt(p.radius * p.radius - r * r);
          REQUIRE(obj.height(x, y) == Catch::Approx(expect).margin(1e-12));
        } else {
          REQUIRE(obj.height(x, y) == kOutsideHeight);
        }
      }
    REQUIRE(obj.height(static_cast<int>(c), static_cast<int>(c)) == 0.0);
  }
  SECTION("same kind, params, seed is bit-identical") {
    ObjectParams p;
    p.star_points = 7;
    const HeightField a = procedural_object(ObjectKind::prism_star, p, 42);
    const HeightField b = procedural_object(ObjectKind::prism_star, p, 42);
    REQUIRE(a.height == b.height);
  }
  SECTION("superellipsoid with exponent 2 equals the ellipsoid") {
    ObjectParams p;
    p.exponent = 2.0;
    p.semi_a = 3.0;
    p.semi_b = 3.0;  // circular footprint: orientation drops out
    p.height = 2.0;
    const HeightField obj = procedural_object(ObjectKind::superellipsoid, p, 3);
    const double c = (obj.width() - 1) / 2.0;
    for (int y = 0; y < obj.height_px(); ++y)
      for (int x = 0; x < obj.width(); ++x) {
        const double r = std::hypot(x - c, y - c) * p.mm_per_pixel;
        if (r / p.semi_a < 0.999) {
          const double expect =
              p.height * (1.0 - std::sqrt(1.0 - (r / p.semi_a) * (r / p.semi_a)));
          REQUIRE(obj.height(x, y) == Catch::Approx(expect).margin(1e-9));
        }
      }
  }
  SECTION("parameter ranges enforced") {
    ObjectParams p;
    p.radius = 0.5;
    REQUIRE_THROWS_AS(procedural_object(ObjectKind::sphere, p, 0), ParameterError);
    p.radius = 4.0;
    p.star_points = 11;
    REQUIRE_THROWS_AS(procedural_object(ObjectKind::prism_star, p, 0),
                      ParameterError);
    p.star_points = 5;
    p.exponent = 0.2;
    REQUIRE_THROWS_AS(procedural_object(ObjectKind::superellipsoid, p, 0),
                      ParameterError);
  }
}

TEST_CASE("indentation") {
  GelSpec gel;
  SECTION("zero press leaves the gel at rest") {
    ObjectParams p;
    const HeightField obj = procedural_object(ObjectKind::sphere, p, 1);
    const ThicknessField t =
        indent(gel, obj, centered_press(0.0, 80, 60), kScale, 160, 120);
    for (double v : t.data()) REQUIRE(v == gel.h0);
  }
  SECTION("flat cylinder gives a piecewise-constant thickness") {
    ObjectParams p;
    p.radius = 3.0;
    const HeightField obj = procedural_object(ObjectKind::cylinder, p, 1);
    const double d = 0.7;
    const ThicknessField t =
        indent(gel, obj, centered_press(d, 80, 60), kScale, 160, 120);
    for (int y = 0; y < 120; ++y)
      for (int x = 0; x < 160; ++x) {
        const double r = std::hypot(x - 80.0, y - 60.0) * kScale.mm_per_pixel;
        if (r <= p.radius - 2 * kScale.mm_per_pixel)
          REQUIRE(t(x, y) == Catch::Approx(gel.h0 - d).margin(1e-12));
        else if (r >= p.radius + 2 * kScale.mm_per_pixel)
          REQUIRE(t(x, y) == gel.h0);
      }
  }
  SECTION("sphere penetration matches per-pixel geometry") {
    ObjectParams p;
    p.radius = 4.0;
    const HeightField obj = procedural_object(ObjectKind::sphere, p, 1);
    const double d = 1.0;
    const DepthMap pen =
        penetration_field(gel, obj, centered_press(d, 80, 60), kScale, 160, 120);
    for (int y = 0; y < 120; ++y)
      for (int x = 0; x < 160; ++x) {
        const double r = std::hypot(x - 80.0, y - 60.0) * kScale.mm_per_pixel;
        double expect = 0.0;
        if (r < p.radius)
          expect = std::max(0.0, std::sqrt(p.radius * p.radius - r * r) -
                                     (p.radius - d));
        REQUIRE(pen(x, y) == Catch::Approx(expect).margin(1e-9));
      }
  }
  SECTION("punch-through rejected") {
    ObjectParams p;
    const HeightField obj = procedural_object(ObjectKind::sphere, p, 1);
    REQUIRE_THROWS_AS(
        indent(gel, obj, centered_press(gel.h0, 80, 60), kScale, 160, 120),
        GeometryError);
  }
}

TEST_CASE("gel flow") {
  GelSpec gel;
  ObjectParams p;
  p.radius = 3.0;
  const HeightField cyl = procedural_object(ObjectKind::cylinder, p, 1);

  SECTION("no contact flows nothing") {
    const ThicknessField pre(161, 121, gel.h0);
    const ThicknessField post =
        flow(pre, gel, centered_press(0.0, 80, 60), kScale);
    REQUIRE(post == pre);
  }
  SECTION("symmetric press yields a mirror-symmetric bulge") {
    const ContactState c = centered_press(0.8, 80, 60);
    const ThicknessField pre = indent(gel, cyl, c, kScale, 161, 121);
    const ThicknessField post = flow(pre, gel, c, kScale);
    for (int y = 0; y < 121; ++y)
      for (int x = 0; x < 161; ++x) {
        REQUIRE(std::abs(post(x, y) - post(160 - x, y)) < 1e-9);
        REQUIRE(std::abs(post(x, y) - post(x, 120 - y)) < 1e-9);
      }
  }
  SECTION("bulge volume equals flow_fraction times displaced volume") {
    Rng rng(17);
    const auto pool = make_object_pool(6, 99, kScale.mm_per_pixel);
    for (int trial = 0; trial < 10; ++trial) {
      ContactState c;
      c.press_depth = uniform_range(rng, 0.3, 1.5);
      c.center_x = uniform_range(rng, 70, 90);
      c.center_y = uniform_range(rng, 50, 70);
      c.drag_x = uniform_range(rng, -1.5, 1.5);
      c.drag_y = uniform_range(rng, -1.5, 1.5);
      c.twist = uniform_range(rng, -0.4, 0.4);
      const HeightField& obj = pool[trial % pool.size()];
      const ThicknessField pre = indent(gel, obj, c, kScale, 161, 121);
      const ThicknessField post = flow(pre, gel, c, kScale);

      double displaced = 0.0, bulge = 0.0;
      const double area = kScale.mm_per_pixel * kScale.mm_per_pixel;
      for (std::size_t i = 0; i < pre.size(); ++i) {
        const double pen = gel.h0 - pre.data()[i];
        if (pen > 0.0) displaced += pen * area;
        bulge += (post.data()[i] - pre.data()[i]) * area;
      }
      REQUIRE(displaced > 0.0);
      REQUIRE(bulge ==
              Catch::Approx(gel.flow_fraction * displaced).epsilon(1e-6));
    }
  }
  SECTION("contact region is never raised") {
    const ContactState c = centered_press(0.8, 80, 60);
    const ThicknessField pre = indent(gel, cyl, c, kScale, 161, 121);
    const ThicknessField post = flow(pre, gel, c, kScale);
    for (std::size_t i = 0; i < pre.size(); ++i)
      if (pre.data()[i] < gel.h0) REQUIRE(post.data()[i] == pre.data()[i]);
  }
  SECTION("drag shifts bulge mass ahead of the motion") {
    ContactState c = centered_press(0.8, 80, 60);
    c.drag_x = 1.5;
    const ThicknessField pre = indent(gel, cyl, c, kScale, 161, 121);
    const ThicknessField post = flow(pre, gel, c, kScale);
    double mass = 0.0, mx = 0.0;
    for (int y = 0; y < 121; ++y)
      for (int x = 0; x < 161; ++x) {
        const double b = post(x, y) - pre(x, y);
        mass += b;
        mx += b * x;
      }
    REQUIRE(mass > 0.0);
    REQUIRE(mx / mass > c.center_x + 1.0);  // centroid ahead along +x
  }
}

TEST_CASE("optical rendering") {
  GelSpec gel;
  SECTION("rest thickness reproduces the reference bit-exactly") {
    const GrayImage ref = make_reference(64, 48, 5);
    const ThicknessField t(64, 48, gel.h0);
    REQUIRE(render(t, ref, gel) == ref);
  }
  SECTION("one decay length of thinning") {
    const GrayImage ref(1, 1, 0.8);
    ThicknessField t(1, 1, gel.h0 - gel.optics.lambda_d);
    const GrayImage out = render(t, ref, gel);
    const double expect = 0.8 - 0.6 * (1.0 - std::exp(-1.0));
    REQUIRE(out(0, 0) == Catch::Approx(expect).margin(1e-12));
    REQUIRE(out(0, 0) == Catch::Approx(0.4207).margin(5e-4));
  }
  SECTION("intensity is strictly monotone in thickness") {
    const GrayImage ref(1, 1, 0.8);
    double prev = 1.0;
    for (int i = 0; i < 100; ++i) {
      ThicknessField t(1, 1, gel.h0 - 3.0 * i / 99.0);
      const double v = render(t, ref, gel)(0, 0);
      if (i > 0) REQUIRE(v < prev);
      prev = v;
    }
  }
  SECTION("bulge brightens monotonically") {
    const GrayImage ref(1, 1, 0.75);
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
      ThicknessField t(1, 1, gel.h0 + 2.0 * i / 49.0);
      const double v = render(t, ref, gel)(0, 0);
      if (i > 0) REQUIRE(v > prev);
      prev = v;
    }
  }
  SECTION("dimension mismatch rejected") {
    REQUIRE_THROWS_AS(
        render(ThicknessField(4, 4, 5.0), GrayImage(5, 4, 0.5), GelSpec{}),
        DimensionError);
  }
}

TEST_CASE("wrench synthesis") {
  GelSpec gel;
  SECTION("no contact gives the zero wrench") {
    const DepthMap p(64, 48, 0.0);
    const Wrench w = synthesize_wrench(p, gel, ContactState{}, kScale);
    REQUIRE(w == Wrench{});
  }
  SECTION("uniform disk matches the closed-form integrals") {
    const double a = 3.0;  // mm
    DepthMap p(161, 161, 0.0);
    for (int y = 0; y < 161; ++y)
      for (int x = 0; x < 161; ++x)
        if (std::hypot(x - 80.0, y - 80.0) * kScale.mm_per_pixel <= a)
          p(x, y) = 0.5;

    ContactState c = centered_press(0.5, 80, 80);
    SECTION("normal force") {
      const Wrench w = synthesize_wrench(p, gel, c, kScale);
      const double expect = -gel.k_n * 0.5 * std::numbers::pi * a * a;
      REQUIRE(w.fz == Catch::Approx(expect).epsilon(0.02));
      REQUIRE(std::abs(w.fx) < 1e-9);
      REQUIRE(std::abs(w.fy) < 1e-9);
      REQUIRE(std::abs(w.tx) < 1e-9);
      REQUIRE(std::abs(w.ty) < 1e-9);
      REQUIRE(std::abs(w.tz) < 1e-9);
      REQUIRE(w.fz == Catch::Approx(-0.5655).epsilon(0.02));
    }
    SECTION("twist torque from the polar moment") {
      c.twist = 0.1;
      const Wrench w = synthesize_wrench(p, gel, c, kScale);
      const double polar = std::numbers::pi * a * a * a * a / 2.0;  // mm^4
      REQUIRE(w.tz == Catch::Approx(gel.k_s * 0.1 * polar * 1e-3).epsilon(0.02));
    }
    SECTION("shear from drag") {
      c.drag_x = 0.8;
      c.drag_y = -0.4;
      const Wrench w = synthesize_wrench(p, gel, c, kScale);
      const double contact_area = std::numbers::pi * a * a;
      REQUIRE(w.fx == Catch::Approx(gel.k_s * 0.8 * contact_area).epsilon(0.02));
      REQUIRE(w.fy == Catch::Approx(gel.k_s * -0.4 * contact_area).epsilon(0.02));
    }
  }
  SECTION("pressure moments by hand on two pixels") {
    DepthMap p(8, 8, 0.0);
    p(2, 3) = 0.5;
    p(5, 3) = 1.0;
    const double A = kScale.mm_per_pixel * kScale.mm_per_pixel;
    // area centroid of the two contact pixels: x = 3.5, y = 3
    const double f1 = gel.k_n * 0.5 * A;
    const double f2 = gel.k_n * 1.0 * A;
    const double mm = kScale.mm_per_pixel;
    const Wrench w = synthesize_wrench(p, gel, ContactState{}, kScale);
    REQUIRE(w.fz == Catch::Approx(-(f1 + f2)).epsilon(1e-12));
    REQUIRE(w.tx == Catch::Approx(0.0).margin(1e-15));
    const double expect_ty = -(f1 * (2 - 3.5) * mm + f2 * (5 - 3.5) * mm) * 1e-3;
    REQUIRE(w.ty == Catch::Approx(expect_ty).epsilon(1e-9));
  }
}

TEST_CASE("radial distortion") {
  const GrayImage ref = make_reference(160, 120, 9);
  SECTION("zero coefficients are the identity") {
    const GrayImage out = apply_distortion(ref, 0.0, 0.0, 79.5, 59.5);
    for (std::size_t i = 0; i < ref.size(); ++i)
      REQUIRE(out.data()[i] == Catch::Approx(ref.data()[i]).margin(1e-12));
  }
  SECTION("center pixel is a fixed point") {
    const GrayImage out = apply_distortion(ref, 0.1, 0.02, 80.0, 60.0);
    REQUIRE(out(80, 60) == ref(80, 60));
  }
  SECTION("off-center lines bow, center lines stay straight") {
    const double cx = 319.5, cy = 239.5;
    auto make_line_image = [&](double row) {
      GrayImage img(640, 480, 0.0);
      for (int x = 0; x < 640; ++x)
        for (int y = 0; y < 480; ++y)
          img(x, y) = std::exp(-0.5 * (y - row) * (y - row) / 4.0);
      return img;
    };
    auto line_residual = [&](const GrayImage& warped, double approx_row) {
      // weighted row centroid per column, then max linear-fit residual
      std::vector<double> xs, ys;
      for (int x = 100; x < 540; x += 10) {
        double wsum = 0.0, ysum = 0.0;
        for (int y = static_cast<int>(approx_row) - 30;
             y < static_cast<int>(approx_row) + 30; ++y) {
          wsum += warped(x, y);
          ysum += warped(x, y) * y;
        }
        if (wsum < 1e-6) continue;
        xs.push_back(x);
        ys.push_back(ysum / wsum);
      }
      const double n = static_cast<double>(xs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double inter = (sy - slope * sx) / n;
      double resid = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        resid = std::max(resid, std::abs(ys[i] - (slope * xs[i] + inter)));
      return resid;
    };

    const GrayImage center_warp =
        apply_distortion(make_line_image(cy), 0.1, 0.0, cx, cy);
    REQUIRE(line_residual(center_warp, cy) < 0.1);

    const GrayImage off_warp =
        apply_distortion(make_line_image(300.0), 0.1, 0.0, cx, cy);
    REQUIRE(line_residual(off_warp, 296.0) > 0.5);
  }
  SECTION("non-invertible parameters rejected") {
    REQUIRE_THROWS_AS(apply_distortion(ref, -0.5, 0.0, 79.5, 59.5),
                      ParameterError);
  }
}

TEST_CASE("session simulation") {
  GelSpec gel;
  const GrayImage ref = make_reference(161, 121, 21);
  const auto pool = make_object_pool(3, 5, kScale.mm_per_pixel);

  SECTION("empty schedule emits nothing") {
    REQUIRE(simulate_session(gel, pool, {}, ref, kScale, 1).empty());
  }
  SECTION("single step composes indent, flow, render and wrench") {
    const ContactState c = centered_press(1.0, 80, 60);
    const auto frames =
        simulate_session(gel, pool, {Trajectory{0, {c}}}, ref, kScale, 1);
    REQUIRE(frames.size() == 1);
    const DepthMap pen = penetration_field(gel, pool[0], c, kScale, 161, 121);
    const Wrench expect = synthesize_wrench(pen, gel, c, kScale);
    REQUIRE(frames[0].wrench == expect);
    REQUIRE(frames[0].object_id == pool[0].id);
  }
  SECTION("press ramp produces strictly increasing |fz|") {
    ObjectParams p;
    p.radius = 4.0;
    const HeightField sphere = procedural_object(ObjectKind::sphere, p, 2);
    Trajectory traj{0, {}};
    for (int s = 1; s <= 10; ++s)
      traj.steps.push_back(centered_press(1.5 * s / 10.0, 80, 60));
    const auto frames = simulate_session(gel, {sphere}, {traj}, ref, kScale, 1);
    REQUIRE(frames.size() == 10);
    double prev = 0.0;
    for (const auto& f : frames) {
      REQUIRE(std::abs(f.wrench.fz) > prev);
      prev = std::abs(f.wrench.fz);
    }
  }
  SECTION("identical seeds give bit-identical streams") {
    Rng rng(3);
    const auto schedule = make_random_schedule(rng, 3, 2, 3, 3, 161, 121, 1.2);
    NoiseSpec noise{true, 0.005};
    const auto a = simulate_session(gel, pool, schedule, ref, kScale, 77, noise);
    const auto b = simulate_session(gel, pool, schedule, ref, kScale, 77, noise);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].tactile == b[i].tactile);
      REQUIRE(a[i].wrench == b[i].wrench);
    }
  }
  SECTION("zero-deformation step reproduces the reference bit-exactly") {
    const ContactState c = centered_press(0.0, 80, 60);
    const auto frames =
        simulate_session(gel, pool, {Trajectory{0, {c}}}, ref, kScale, 1);
    REQUIRE(frames[0].tactile == ref);
    REQUIRE(frames[0].wrench == Wrench{});
  }
}

TEST_CASE("session serialization") {
  GelSpec gel;
  const GrayImage ref = make_reference(120, 90, 33);
  const auto pool = make_object_pool(2, 8, kScale.mm_per_pixel);
  Rng rng(4);
  const auto schedule = make_random_schedule(rng, 2, 1, 2, 2, 120, 90, 1.0);
  const auto frames = simulate_session(gel, pool, schedule, ref, kScale, 9);

  const auto dir = std::filesystem::temp_directory_path() / "tact_session";
  std::filesystem::remove_all(dir);
  save_session(dir, frames, ref, 9);
  REQUIRE(std::filesystem::exists(dir / "reference.pgm"));
  REQUIRE(std::filesystem::exists(dir / "session.jsonl"));
  REQUIRE(std::filesystem::exists(dir / "frames" / "000000.pgm"));

  std::ifstream manifest(dir / "session.jsonl");
  std::string line;
  std::size_t records = 0;
  while (std::getline(manifest, line))
    if (!line.empty()) ++records;
  REQUIRE(records == frames.size());
}

TEST_CASE("reference image stays within its band") {
  const GrayImage ref = make_reference(160, 120, 123, 0.75, 0.05);
  for (double v : ref.data()) {
    REQUIRE(v >= 0.70 - 1e-12);
    REQUIRE(v <= 0.80 + 1e-12);
  }
  REQUIRE(make_reference(160, 120, 123) == make_reference(160, 120, 123));
}
