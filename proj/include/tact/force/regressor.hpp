#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tact/core/rng.hpp"
#include "tact/core/types.hpp"
#include "tact/deform/representation.hpp"

namespace tact::force {

// CHW tensor, v[c*h*w + y*w + x].
struct Tensor {
  int ch = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int ch_in, int h_in, int w_in)
      : ch(ch_in), h(h_in), w(w_in),
        v(static_cast<std::size_t>(ch_in) * h_in * w_in, 0.0) {}

  double& at(int c, int y, int x) {
    return v[(static_cast<std::size_t>(c) * h + y) * w + x];
  }
  double at(int c, int y, int x) const {
    return v[(static_cast<std::size_t>(c) * h + y) * w + x];
  }
};

struct ConvStageSpec {
  int in_ch, out_ch, kernel, stride;
};

// Valid (unpadded) strided convolutions with ReLU, global average pooling,
// then one affine map to the 6 wrench outputs.
struct NetSpec {
  int input_ch = 3;
  int input_w = deform::kInputWidth;
  int input_h = deform::kInputHeight;
  std::vector<ConvStageSpec> stages;
  static constexpr int kOutputs = 6;

  static NetSpec standard() {
    NetSpec spec;
    spec.stages = {{3, 8, 3, 2}, {8, 16, 3, 2}, {16, 32, 3, 2}};
    return spec;
  }

  // Spatial dims after each stage; throws if a stage underflows.
  std::vector<std::array<int, 2>> stage_dims() const {
    std::vector<std::array<int, 2>> dims;
    int w = input_w, h = input_h, ch = input_ch;
    for (const ConvStageSpec& s : stages) {
      if (s.in_ch != ch) throw DimensionError("conv stage channel mismatch");
      if (w < s.kernel || h < s.kernel)
        throw DimensionError("conv stage input smaller than kernel");
      w = (w - s.kernel) / s.stride + 1;
      h = (h - s.kernel) / s.stride + 1;
      ch = s.out_ch;
      dims.push_back({w, h});
    }
    return dims;
  }

  int feature_channels() const {
    return stages.empty() ? input_ch : stages.back().out_ch;
  }
};

struct RegressorParams {
  NetSpec spec;
  std::vector<std::vector<double>> conv_w;  // [stage][out*in*k*k]
  std::vector<std::vector<double>> conv_b;  // [stage][out]
  std::vector<double> fc_w;                 // [6 * feature_channels]
  std::vector<double> fc_b;                 // [6]

  std::size_t count() const {
    std::size_t n = fc_w.size() + fc_b.size();
    for (const auto& w : conv_w) n += w.size();
    for (const auto& b : conv_b) n += b.size();
    return n;
  }
};

template <typename Params, typename F>
void for_each_array(Params& p, F&& f) {
  for (auto& w : p.conv_w) f(w);
  for (auto& b : p.conv_b) f(b);
  f(p.fc_w);
  f(p.fc_b);
}

inline RegressorParams make_zero_params(const NetSpec& spec) {
  spec.stage_dims();  // validates
  RegressorParams p;
  p.spec = spec;
  for (const ConvStageSpec& s : spec.stages) {
    p.conv_w.emplace_back(
        static_cast<std::size_t>(s.out_ch) * s.in_ch * s.kernel * s.kernel, 0.0);
    p.conv_b.emplace_back(s.out_ch, 0.0);
  }
  p.fc_w.assign(static_cast<std::size_t>(NetSpec::kOutputs) *
                    spec.feature_channels(),
                0.0);
  p.fc_b.assign(NetSpec::kOutputs, 0.0);
  return p;
}

// Uniform in ±sqrt(1/fan_in), seeded.
inline RegressorParams init_params(const NetSpec& spec, std::uint64_t seed) {
  RegressorParams p = make_zero_params(spec);
  Rng rng(seed);
  for (std::size_t s = 0; s < spec.stages.size(); ++s) {
    const ConvStageSpec& st = spec.stages[s];
    const double bound =
        std::sqrt(1.0 / (static_cast<double>(st.in_ch) * st.kernel * st.kernel));
    for (double& w : p.conv_w[s]) w = uniform_range(rng, -bound, bound);
    for (double& b : p.conv_b[s]) b = uniform_range(rng, -bound, bound);
  }
  const double bound = std::sqrt(1.0 / spec.feature_channels());
  for (double& w : p.fc_w) w = uniform_range(rng, -bound, bound);
  for (double& b : p.fc_b) b = uniform_range(rng, -bound, bound);
  return p;
}

struct ForwardCache {
  std::vector<Tensor> stage_in;   // input to each conv
  std::vector<Tensor> preact;     // conv output before ReLU
  std::vector<double> pooled;     // global average per channel
};

namespace detail {

inline Tensor conv_forward(const Tensor& in, const ConvStageSpec& s,
                           const std::vector<double>& w,
                           const std::vector<double>& b) {
  const int ow = (in.w - s.kernel) / s.stride + 1;
  const int oh = (in.h - s.kernel) / s.stride + 1;
  Tensor out(s.out_ch, oh, ow);
  const int k = s.kernel;
  for (int oc = 0; oc < s.out_ch; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b[oc];
        for (int ic = 0; ic < s.in_ch; ++ic) {
          const std::size_t wbase =
              ((static_cast<std::size_t>(oc) * s.in_ch + ic) * k) * k;
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx)
              acc += w[wbase + static_cast<std::size_t>(ky) * k + kx] *
                     in.at(ic, oy * s.stride + ky, ox * s.stride + kx);
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

}  // namespace detail

// Deterministic forward pass; pass a cache to enable backprop.
inline std::array<double, 6> forward(const RegressorParams& p,
                                     const Tensor& input,
                                     ForwardCache* cache = nullptr) {
  if (input.ch != p.spec.input_ch || input.w != p.spec.input_w ||
      input.h != p.spec.input_h)
    throw DimensionError("regressor input shape mismatch");

  Tensor act = input;
  if (cache) {
    cache->stage_in.clear();
    cache->preact.clear();
  }
  for (std::size_t s = 0; s < p.spec.stages.size(); ++s) {
    if (cache) cache->stage_in.push_back(act);
    Tensor pre =
        detail::conv_forward(act, p.spec.stages[s], p.conv_w[s], p.conv_b[s]);
    for (double v : pre.v)
      if (!std::isfinite(v)) throw NumericError("non-finite activation");
    if (cache) cache->preact.push_back(pre);
    for (double& v : pre.v) v = v > 0.0 ? v : 0.0;
    act = std::move(pre);
  }

  const int channels = act.ch;
  const std::size_t npix = static_cast<std::size_t>(act.w) * act.h;
  std::vector<double> pooled(channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < npix; ++i) acc += act.v[c * npix + i];
    pooled[c] = acc / static_cast<double>(npix);
  }
  if (cache) cache->pooled = pooled;

  std::array<double, 6> out;
  for (int j = 0; j < 6; ++j) {
    double acc = p.fc_b[j];
    for (int c = 0; c < channels; ++c)
      acc += p.fc_w[static_cast<std::size_t>(j) * channels + c] * pooled[c];
    out[j] = acc;
  }
  for (double v : out)
    if (!std::isfinite(v)) throw NumericError("non-finite regressor output");
  return out;
}

namespace detail {

// Accumulates gradients for one sample given dL/doutput.
inline void backward(const RegressorParams& p, const ForwardCache& cache,
                     const std::array<double, 6>& dout,
                     RegressorParams& grad) {
  const int channels = p.spec.feature_channels();
  std::vector<double> dpool(channels, 0.0);
  for (int j = 0; j < 6; ++j) {
    grad.fc_b[j] += dout[j];
    for (int c = 0; c < channels; ++c) {
      grad.fc_w[static_cast<std::size_t>(j) * channels + c] +=
          dout[j] * cache.pooled[c];
      dpool[c] += dout[j] * p.fc_w[static_cast<std::size_t>(j) * channels + c];
    }
  }

  const Tensor& last_pre = cache.preact.back();
  const std::size_t npix = static_cast<std::size_t>(last_pre.w) * last_pre.h;
  Tensor dact(last_pre.ch, last_pre.h, last_pre.w);
  for (int c = 0; c < last_pre.ch; ++c) {
    const double g = dpool[c] / static_cast<double>(npix);
    for (std::size_t i = 0; i < npix; ++i) dact.v[c * npix + i] = g;
  }

  for (int s = static_cast<int>(p.spec.stages.size()) - 1; s >= 0; --s) {
    const ConvStageSpec& st = p.spec.stages[s];
    const Tensor& pre = cache.preact[s];
    const Tensor& in = cache.stage_in[s];
    const int k = st.kernel;

    // ReLU: subgradient 0 at exact zeros
    Tensor dpre = dact;
    for (std::size_t i = 0; i < dpre.v.size(); ++i)
      if (!(pre.v[i] > 0.0)) dpre.v[i] = 0.0;

    Tensor din(in.ch, in.h, in.w);
    for (int oc = 0; oc < st.out_ch; ++oc) {
      for (int oy = 0; oy < pre.h; ++oy) {
        for (int ox = 0; ox < pre.w; ++ox) {
          const double g = dpre.at(oc, oy, ox);
          if (g == 0.0) continue;
          grad.conv_b[s][oc] += g;
          for (int ic = 0; ic < st.in_ch; ++ic) {
            const std::size_t wbase =
                ((static_cast<std::size_t>(oc) * st.in_ch + ic) * k) * k;
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const std::size_t wi = wbase + static_cast<std::size_t>(ky) * k + kx;
                const int iy = oy * st.stride + ky;
                const int ix = ox * st.stride + kx;
                grad.conv_w[s][wi] += g * in.at(ic, iy, ix);
                din.at(ic, iy, ix) += g * p.conv_w[s][wi];
              }
          }
        }
      }
    }
    dact = std::move(din);
  }
}

}  // namespace detail

struct Batch {
  std::vector<const Tensor*> inputs;
  std::vector<std::array<double, 6>> targets;  // normalized
};

// Summed absolute error over the batch and all 6 components, with gradients
// in the same layout as the parameters. The subgradient of |.| at 0 is 0.
inline double loss_and_gradient(const RegressorParams& p, const Batch& batch,
                                RegressorParams& grad) {
  if (batch.inputs.empty() || batch.inputs.size() != batch.targets.size())
    throw ParameterError("empty or inconsistent batch");
  if (grad.count() != p.count())
    grad = make_zero_params(p.spec);
  else
    for_each_array(grad, [](std::vector<double>& a) {
      std::fill(a.begin(), a.end(), 0.0);
    });
  double loss = 0.0;
  ForwardCache cache;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    const std::array<double, 6> pred = forward(p, *batch.inputs[i], &cache);
    std::array<double, 6> dout;
    for (int j = 0; j < 6; ++j) {
      const double err = pred[j] - batch.targets[i][j];
      loss += std::abs(err);
      dout[j] = err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0);
    }
    detail::backward(p, cache, dout, grad);
  }
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
  return loss;
}

inline Tensor tensor_from_triple(const deform::DeformationTriple& triple) {
  const deform::DeformationTriple* t = &triple;
  deform::DeformationTriple resized;
  if (triple.width() != deform::kInputWidth ||
      triple.height() != deform::kInputHeight) {
    resized = deform::downsample_to_input(triple);
    t = &resized;
  }
  Tensor out(3, deform::kInputHeight, deform::kInputWidth);
  const std::size_t npix =
      static_cast<std::size_t>(deform::kInputWidth) * deform::kInputHeight;
  for (std::size_t i = 0; i < npix; ++i) {
    out.v[i] = t->darker.data()[i];
    out.v[npix + i] = t->brighter.data()[i];
    out.v[2 * npix + i] = t->reference.data()[i];
  }
  return out;
}

}  // namespace tact::force
