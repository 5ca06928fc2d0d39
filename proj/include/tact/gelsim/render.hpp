#pragma once

#include <algorithm>
#include <cmath>

#include "tact/gelsim/gel.hpp"

namespace tact::gelsim {

// Camera view of a deformed gel: thinner-than-rest pixels darken, thicker
// ones brighten, both saturating exponentials clamped to [0, 1]. A pixel at
// rest thickness reproduces the reference exactly.
inline GrayImage render(const ThicknessField& thickness,
                        const GrayImage& reference, const GelSpec& gel) {
  require_same_size(thickness, reference, "render");
  const OpticalModel& o = gel.optics;
  GrayImage out(reference.width(), reference.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = thickness.data()[i];
    const double ref = reference.data()[i];
    double v = ref;
    if (t < gel.h0)
      v = ref - o.i_drop_max * (1.0 - std::exp(-(gel.h0 - t) / o.lambda_d));
    else if (t > gel.h0)
      v = ref + o.i_rise_max * (1.0 - std::exp(-(t - gel.h0) / o.lambda_b));
    out.data()[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

}  // namespace tact::gelsim
