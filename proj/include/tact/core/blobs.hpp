#pragma once

#include <algorithm>
#include <vector>

#include "tact/core/types.hpp"

namespace tact {

struct Blob {
  double centroid_x = 0.0;  // sub-pixel, drop-weighted
  double centroid_y = 0.0;
  int area = 0;  // pixels
};

// Connected components of pixels whose intensity drop (reference - tactile,
// i.e. -diff) exceeds `threshold`. 4-connectivity; components smaller than
// `min_area` are discarded. Result sorted by (row, column) of centroid.
inline std::vector<Blob> detect_blobs(const DiffImage& diff, double threshold,
                                      int min_area = 1) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ParameterError("blob threshold must lie in (0, 1)");

  const int w = diff.width();
  const int h = diff.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Blob> blobs;
  std::vector<int> stack;

  auto drop = [&](int x, int y) { return -diff(x, y); };

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (label[i0] >= 0 || !(drop(x0, y0) > threshold)) continue;

      const int id = static_cast<int>(blobs.size());
      label[i0] = id;
      stack.assign(1, static_cast<int>(i0));
      double wsum = 0.0, wx = 0.0, wy = 0.0;
      int area = 0;

      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        const double d = drop(x, y);
        wsum += d;
        wx += d * x;
        wy += d * y;
        ++area;

        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int n = 0; n < 4; ++n) {
          if (!diff.in_bounds(nx[n], ny[n])) continue;
          const int ni = ny[n] * w + nx[n];
          if (label[ni] >= 0 || !(drop(nx[n], ny[n]) > threshold)) continue;
          label[ni] = id;
          stack.push_back(ni);
        }
      }

      blobs.push_back(Blob{wx / wsum, wy / wsum, area});
    }
  }

  std::erase_if(blobs, [&](const Blob& b) { return b.area < min_area; });
  std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return a.centroid_y != b.centroid_y ? a.centroid_y < b.centroid_y
                                        : a.centroid_x < b.centroid_x;
  });
  return blobs;
}

}  // namespace tact
