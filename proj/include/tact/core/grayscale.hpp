#pragma once

#include <algorithm>

#include "tact/core/types.hpp"

namespace tact {

// BT.601 luminance. Channels must share dimensions; values in [0, 1].
inline GrayImage to_grayscale(const RgbImage& rgb) {
  require_same_size(rgb.r, rgb.g, "to_grayscale");
  require_same_size(rgb.r, rgb.b, "to_grayscale");
  GrayImage out(rgb.width(), rgb.height());
  const auto& r = rgb.r.data();
  const auto& g = rgb.g.data();
  const auto& b = rgb.b.data();
  auto& o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double y = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    o[i] = std::clamp(y, 0.0, 1.0);
  }
  return out;
}

}  // namespace tact
