#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tact/core/errors.hpp"
#include "tact/core/grid.hpp"

namespace tact {

// Grayscale PFM ("Pf"), float32, scale -1.0 (little-endian), rows stored
// bottom-to-top per the format convention.
inline void write_pfm(const std::filesystem::path& path,
                      const Grid<double>& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "Pf\n" << grid.width() << " " << grid.height() << "\n-1.0\n";
  std::vector<float> row(grid.width());
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x)
      row[x] = static_cast<float>(grid(x, y));
    out.write(reinterpret_cast<const char*>(row.data()),
              row.size() * sizeof(float));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline Grid<double> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw IoError("not a grayscale PFM: " + path.string());
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  in.get();  // single whitespace after the scale line
  if (w <= 0 || h <= 0) throw IoError("bad PFM dimensions: " + path.string());
  if (!(scale < 0.0)) throw IoError("big-endian PFM unsupported: " + path.string());
  std::vector<float> row(w);
  Grid<double> grid(w, h);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw IoError("truncated PFM: " + path.string());
    for (int x = 0; x < w; ++x) grid(x, y) = row[x];
  }
  return grid;
}

}  // namespace tact
