#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "tact/core/errors.hpp"

namespace tact {

// ASCII PLY with float32 x/y/z vertex properties, coordinates in mm.
inline void write_ply(const std::filesystem::path& path,
                      const std::vector<std::array<double, 3>>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "end_header\n";
  char line[96];
  for (const auto& p : points) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n",
                  static_cast<float>(p[0]), static_cast<float>(p[1]),
                  static_cast<float>(p[2]));
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace tact
