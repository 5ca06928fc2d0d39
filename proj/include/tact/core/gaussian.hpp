#pragma once

#include <cmath>
#include <vector>

#include "tact/core/types.hpp"

namespace tact {

// Normalized 1D Gaussian taps for offsets -radius..radius.
inline std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be positive");
  if (radius < 1) throw ParameterError("gaussian radius must be >= 1");
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// Separable convolution, horizontal then vertical, edge replication.
inline Grid<double> gaussian_blur(const Grid<double>& img, double sigma,
                                  int radius) {
  const std::vector<double> k = gaussian_kernel(sigma, radius);
  const int w = img.width();
  const int h = img.height();

  Grid<double> tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int sx = std::clamp(x + i, 0, w - 1);
        acc += k[i + radius] * img(sx, y);
      }
      tmp(x, y) = acc;
    }
  }

  Grid<double> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int sy = std::clamp(y + i, 0, h - 1);
        acc += k[i + radius] * tmp(x, sy);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace tact
