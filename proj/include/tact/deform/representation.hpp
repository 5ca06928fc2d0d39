#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tact/core/types.hpp"
#include "tact/io/pgm.hpp"
#include "tact/io/ppm.hpp"

namespace tact::deform {

// Rectified negative part of tactile - reference: the contact signal.
inline GrayImage darker_image(const GrayImage& ref, const GrayImage& tactile) {
  require_same_size(ref, tactile, "darker_image");
  GrayImage out(ref.width(), ref.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = std::max(0.0, ref.data()[i] - tactile.data()[i]);
  return out;
}

// Rectified positive part: the gel-flow bulge signal.
inline GrayImage brighter_image(const GrayImage& ref, const GrayImage& tactile) {
  require_same_size(ref, tactile, "brighter_image");
  GrayImage out(ref.width(), ref.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = std::max(0.0, tactile.data()[i] - ref.data()[i]);
  return out;
}

// The regressor input: contact channel, flow channel, and the reference
// itself. At every pixel at most one of darker/brighter is nonzero.
struct DeformationTriple {
  GrayImage darker;
  GrayImage brighter;
  GrayImage reference;

  int width() const { return darker.width(); }
  int height() const { return darker.height(); }
};

inline DeformationTriple compose_triple(const GrayImage& ref,
                                        const GrayImage& tactile) {
  DeformationTriple t;
  t.darker = darker_image(ref, tactile);
  t.brighter = brighter_image(ref, tactile);
  t.reference = ref;
  return t;
}

// Red = contact, green = flow, both over the reference at 50% opacity.
inline RgbImage visualize(const DeformationTriple& triple, double gain = 3.0) {
  if (!(gain > 0.0)) throw ParameterError("visualization gain must be positive");
  const int w = triple.width();
  const int h = triple.height();
  RgbImage img{Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h)};
  for (std::size_t i = 0; i < img.r.size(); ++i) {
    const double base = 0.5 * triple.reference.data()[i];
    img.r.data()[i] = base + 0.5 * std::clamp(gain * triple.darker.data()[i], 0.0, 1.0);
    img.g.data()[i] = base + 0.5 * std::clamp(gain * triple.brighter.data()[i], 0.0, 1.0);
    img.b.data()[i] = base;
  }
  return img;
}

// Contact iff the summed darker energy strictly exceeds the threshold.
inline bool detect_contact(const GrayImage& darker, double energy_threshold) {
  if (!(energy_threshold > 0.0))
    throw ParameterError("contact energy threshold must be positive");
  double energy = 0.0;
  for (double v : darker.data()) energy += v;
  return energy > energy_threshold;
}

// Area-averaging resample. Each output pixel integrates the exact fractional
// box it covers in the input, so any input size reduces cleanly.
inline GrayImage downsample_area(const GrayImage& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw ParameterError("bad downsample size");
  const double sx = static_cast<double>(img.width()) / out_w;
  const double sy = static_cast<double>(img.height()) / out_h;
  GrayImage out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const double y0 = oy * sy;
    const double y1 = (oy + 1) * sy;
    for (int ox = 0; ox < out_w; ++ox) {
      const double x0 = ox * sx;
      const double x1 = (ox + 1) * sx;
      double acc = 0.0;
      for (int y = static_cast<int>(y0); y < static_cast<int>(std::ceil(y1)); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        for (int x = static_cast<int>(x0); x < static_cast<int>(std::ceil(x1)); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          acc += wx * wy * img(std::min(x, img.width() - 1),
                               std::min(y, img.height() - 1));
        }
      }
      out(ox, oy) = acc / (sx * sy);
    }
  }
  return out;
}

// Regressor input resolution.
inline constexpr int kInputWidth = 80;
inline constexpr int kInputHeight = 60;

// Pads right/bottom with zeros to 4:3 if needed, then area-averages down.
inline DeformationTriple downsample_to_input(const DeformationTriple& triple) {
  const int w = triple.width();
  const int h = triple.height();
  int pw = w, ph = h;
  if (3 * w >= 4 * h)
    ph = (3 * w + 3) / 4;
  else
    pw = (4 * h + 2) / 3;

  auto pad_and_resample = [&](const GrayImage& src) {
    if (pw == w && ph == h) return downsample_area(src, kInputWidth, kInputHeight);
    GrayImage padded(pw, ph, 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) padded(x, y) = src(x, y);
    return downsample_area(padded, kInputWidth, kInputHeight);
  };

  DeformationTriple out;
  out.darker = pad_and_resample(triple.darker);
  out.brighter = pad_and_resample(triple.brighter);
  out.reference = pad_and_resample(triple.reference);
  return out;
}

// Three PGM planes plus a JSON sidecar describing them.
inline void save_triple(const std::filesystem::path& sidecar_path,
                        const DeformationTriple& triple) {
  namespace fs = std::filesystem;
  const fs::path dir = sidecar_path.parent_path();
  const std::string stem = sidecar_path.stem().string();
  if (!dir.empty()) fs::create_directories(dir);
  write_pgm(dir / (stem + "_darker.pgm"), triple.darker);
  write_pgm(dir / (stem + "_brighter.pgm"), triple.brighter);
  write_pgm(dir / (stem + "_reference.pgm"), triple.reference);
  nlohmann::json j{{"darker", stem + "_darker.pgm"},
                   {"brighter", stem + "_brighter.pgm"},
                   {"reference", stem + "_reference.pgm"},
                   {"width", triple.width()},
                   {"height", triple.height()}};
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) throw IoError("cannot write triple sidecar: " + sidecar_path.string());
  out << j.dump(2) << "\n";
}

inline DeformationTriple load_triple(const std::filesystem::path& sidecar_path) {
  std::ifstream in(sidecar_path, std::ios::binary);
  if (!in) throw IoError("cannot read triple sidecar: " + sidecar_path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  const std::filesystem::path dir = sidecar_path.parent_path();
  DeformationTriple t;
  t.darker = read_pgm(dir / j.at("darker").get<std::string>());
  t.brighter = read_pgm(dir / j.at("brighter").get<std::string>());
  t.reference = read_pgm(dir / j.at("reference").get<std::string>());
  return t;
}

}  // namespace tact::deform
