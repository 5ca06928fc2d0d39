#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "tact/core/errors.hpp"
#include "tact/core/types.hpp"

namespace tact {

// Binary PPM (P6, maxval 255).
inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  require_same_size(img.r, img.g, "write_ppm");
  require_same_size(img.r, img.b, "write_ppm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      auto q = [](double v) {
        return static_cast<std::uint8_t>(
            std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      };
      row[3 * x + 0] = q(img.r(x, y));
      row[3 * x + 1] = q(img.g(x, y));
      row[3 * x + 2] = q(img.b(x, y));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace tact
