#ifndef BSNN_NETCORE_HPP_
#define BSNN_NETCORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsnn/bern.hpp"
#include "bsnn/fxp.hpp"
#include "bsnn/sampler.hpp"

// Layer and network forward passes. Two modes share one layer
// description: quantized-ReLU ANN evaluation and the spiking IF path
// with folded batch-norm and reset-by-subtraction.

namespace bsnn {

enum class LayerKind : uint8_t {
  EncoderConv = 0,
  BinaryConv = 1,
  BinaryFc = 2,
  ResidualAdd = 3,
};

// Fully-connected layers are expressed as 1x1 convolutions over a 1x1
// spatial extent (in_ch = in features, out_ch = out features).
struct Geometry {
  int in_ch = 1, out_ch = 1;
  int kh = 1, kw = 1;
  int stride = 1, pad = 0;
  int in_h = 1, in_w = 1;

  int out_h() const { return (in_h + 2 * pad - kh) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kw) / stride + 1; }
  int in_elems() const { return in_ch * in_h * in_w; }
  int out_elems() const { return out_ch * out_h() * out_w(); }
  int fan_in() const { return in_ch * kh * kw; }
  int weight_count() const { return out_ch * fan_in(); }

  static Geometry fc(int in_features, int out_features) {
    Geometry g;
    g.in_ch = in_features;
    g.out_ch = out_features;
    return g;
  }
};

struct LayerSpec {
  LayerKind kind = LayerKind::BinaryConv;
  Geometry geom;
  BernoulliTensor weight;  // empty for ResidualAdd

  // Effective folded-BN affine used by the forward passes. After
  // conversion `a` already carries the absorbed scale of the previous
  // spiking layer; on deploy models these are decoded quantized values.
  std::vector<double> a, b;  // per output channel
  double theta = 1.0;
  int levels = 8;    // L
  double step = 1.0; // s, pre-quantization metadata

  // Deploy-side quantized coefficients (source of a/b/theta when deploy).
  QAffineVec a_q, b_q;
  QAffine theta_q;

  int skip_from = -1;  // ResidualAdd: index of the skip-branch layer

  bool has_weights() const { return kind != LayerKind::ResidualAdd; }
};

struct NetworkModel {
  std::vector<LayerSpec> layers;
  int input_ch = 1, input_h = 8, input_w = 8;
  int class_count = 2;
  int default_T = 8;
  int default_n_mc = 10;
  bool deploy = false;

  size_t total_weights() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.weight.size();
    return n;
  }
};

// Quantized ReLU: L levels over [0, s], floor(x + 1/2) rounding.
inline double qrelu(double v, double s, int levels) {
  if (!(s > 0.0)) throw std::domain_error("qrelu: step size must be > 0");
  if (levels < 2) throw std::domain_error("qrelu: L must be >= 2");
  double q = std::floor(v * levels / s + 0.5);
  q = std::clamp(q, 0.0, static_cast<double>(levels));
  return s * q / levels;
}

struct FoldedBnReal {
  double a = 1.0, b = 0.0;
};

// BN(v) = gamma * (v - mu) / sqrt(var + eps) + beta == a*v + b.
inline FoldedBnReal fold_bn(double gamma, double beta, double mu, double var,
                            double eps = 1e-5) {
  double denom = var + eps;
  if (!(denom > 0.0)) throw std::domain_error("fold_bn: var + eps <= 0");
  double a = gamma / std::sqrt(denom);
  return FoldedBnReal{a, beta - a * mu};
}

struct IfResult {
  uint8_t spike = 0;
  double u = 0.0;
};

// Integrate, fire when U >= theta (Heaviside with Theta(0) = 1), then
// reset by subtraction.
inline IfResult if_step(double u, double current, double theta) {
  if (!(theta > 0.0)) throw std::domain_error("if_step: theta must be > 0");
  double mid = u + current;
  uint8_t spike = mid >= theta ? 1 : 0;
  return IfResult{spike, mid - spike * theta};
}

// Optional instrumentation hooks for the spiking forward pass.
struct SpikeTrace {
  // [layer][timestep] -> spike count emitted by that layer at that step.
  std::vector<std::vector<int64_t>> counts;
};

struct OpCounter {
  // Each weight-operand accumulate counts as 2 ops (multiply + accumulate).
  int64_t mac_ops = 0;
};

namespace detail {

// Shared convolution loop. `acc_fn(out_index, weight_index, in_index_or_-1)`
// is called for every (output element, kernel tap) pair, including taps
// falling into the zero pad: the PE array performs those accumulates
// regardless, which keeps the analytic cycle/op model exact.
template <typename AccFn>
void for_each_tap(const Geometry& g, AccFn&& acc_fn) {
  const int oh = g.out_h(), ow = g.out_w();
  for (int oc = 0; oc < g.out_ch; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int out_idx = (oc * oh + oy) * ow + ox;
        for (int ic = 0; ic < g.in_ch; ++ic) {
          for (int ky = 0; ky < g.kh; ++ky) {
            for (int kx = 0; kx < g.kw; ++kx) {
              int iy = oy * g.stride + ky - g.pad;
              int ix = ox * g.stride + kx - g.pad;
              int w_idx = ((oc * g.in_ch + ic) * g.kh + ky) * g.kw + kx;
              int in_idx = -1;
              if (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w) {
                in_idx = (ic * g.in_h + iy) * g.in_w + ix;
              }
              acc_fn(out_idx, w_idx, in_idx);
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

// ANN-mode layer forward: conv/fc with supplied real weights (expected
// values 2p-1 or a fixed +/-1 sample), folded BN, quantized ReLU.
inline std::vector<double> layer_forward_ann(const LayerSpec& layer,
                                             const std::vector<double>& x,
                                             const std::vector<double>& weights) {
  if (layer.kind == LayerKind::ResidualAdd) {
    throw std::invalid_argument("layer_forward_ann: use residual_forward_ann");
  }
  const Geometry& g = layer.geom;
  if (static_cast<int>(x.size()) != g.in_elems()) {
    throw std::invalid_argument("layer_forward_ann: input shape mismatch");
  }
  if (static_cast<int>(weights.size()) != g.weight_count()) {
    throw std::invalid_argument("layer_forward_ann: weight shape mismatch");
  }
  std::vector<double> acc(g.out_elems(), 0.0);
  detail::for_each_tap(g, [&](int out_idx, int w_idx, int in_idx) {
    if (in_idx >= 0) acc[out_idx] += weights[w_idx] * x[in_idx];
  });
  const int oh = g.out_h(), ow = g.out_w();
  std::vector<double> y(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) {
    int oc = static_cast<int>(i) / (oh * ow);
    double v = layer.a[oc] * acc[i] + layer.b[oc];
    y[i] = qrelu(v, layer.step, layer.levels);
  }
  return y;
}

// ResidualAdd in ANN mode: sum the two branch tensors, then BN + qrelu.
inline std::vector<double> residual_forward_ann(const LayerSpec& layer,
                                                const std::vector<double>& main,
                                                const std::vector<double>& skip) {
  if (main.size() != skip.size()) {
    throw std::invalid_argument("residual_forward_ann: branch shape mismatch");
  }
  const Geometry& g = layer.geom;
  const int plane = g.out_h() * g.out_w();
  std::vector<double> y(main.size());
  for (size_t i = 0; i < main.size(); ++i) {
    int oc = static_cast<int>(i) / plane;
    double v = layer.a[oc] * (main[i] + skip[i]) + layer.b[oc];
    y[i] = qrelu(v, layer.step, layer.levels);
  }
  return y;
}

// Per-MC-member run state: membranes plus last emitted spikes per layer.
struct MembraneState {
  std::vector<std::vector<double>> u;        // per layer
  std::vector<std::vector<uint8_t>> spikes;  // per layer output
};

inline MembraneState init_membranes(const NetworkModel& model) {
  MembraneState st;
  st.u.resize(model.layers.size());
  st.spikes.resize(model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    int n = model.layers[l].geom.out_elems();
    st.u[l].assign(n, model.layers[l].theta / 2.0);
    st.spikes[l].assign(n, 0);
  }
  return st;
}

// One timestep of one layer. EncoderConv consumes the analog frame
// (constant-current coding, same frame every step); binary layers
// consume the previous layer's spike plane through mux products.
inline void layer_forward_snn_step(const NetworkModel& model, size_t layer_idx,
                                   const std::vector<double>& analog_input,
                                   MembraneState& state,
                                   const std::vector<std::vector<int8_t>>& sampled,
                                   OpCounter* ops = nullptr) {
  const LayerSpec& layer = model.layers[layer_idx];
  const Geometry& g = layer.geom;
  std::vector<uint8_t>& out = state.spikes[layer_idx];
  std::vector<double>& u = state.u[layer_idx];
  if (static_cast<int>(u.size()) != g.out_elems()) {
    throw std::invalid_argument("layer_forward_snn_step: uninitialized state");
  }
  const int plane = g.out_h() * g.out_w();

  if (layer.kind == LayerKind::ResidualAdd) {
    if (layer_idx == 0 || layer.skip_from < 0 ||
        layer.skip_from >= static_cast<int>(layer_idx) - 1) {
      throw std::invalid_argument("layer_forward_snn_step: bad residual wiring");
    }
    const auto& main = state.spikes[layer_idx - 1];
    const auto& skip = state.spikes[layer.skip_from];
    if (main.size() != out.size() || skip.size() != out.size()) {
      throw std::invalid_argument("layer_forward_snn_step: residual shape mismatch");
    }
    for (size_t i = 0; i < out.size(); ++i) {
      int oc = static_cast<int>(i) / plane;
      double current = layer.a[oc] * (main[i] + skip[i]) + layer.b[oc];
      IfResult r = if_step(u[i], current, layer.theta);
      u[i] = r.u;
      out[i] = r.spike;
    }
    return;
  }

  const std::vector<int8_t>& w = sampled[layer_idx];
  if (static_cast<int>(w.size()) != g.weight_count()) {
    throw std::invalid_argument("layer_forward_snn_step: weights not sampled");
  }

  if (layer.kind == LayerKind::EncoderConv) {
    if (static_cast<int>(analog_input.size()) != g.in_elems()) {
      throw std::invalid_argument("layer_forward_snn_step: input shape mismatch");
    }
    std::vector<double> acc(g.out_elems(), 0.0);
    int64_t taps = 0;
    detail::for_each_tap(g, [&](int out_idx, int w_idx, int in_idx) {
      if (in_idx >= 0) acc[out_idx] += w[w_idx] * analog_input[in_idx];
      ++taps;
    });
    if (ops) ops->mac_ops += 2 * taps;
    for (size_t i = 0; i < acc.size(); ++i) {
      int oc = static_cast<int>(i) / plane;
      IfResult r = if_step(u[i], layer.a[oc] * acc[i] + layer.b[oc], layer.theta);
      u[i] = r.u;
      out[i] = r.spike;
    }
    return;
  }

  // Binary conv / fc on spikes: pure integer accumulation of 2-bit products.
  if (layer_idx == 0) {
    throw std::invalid_argument("layer_forward_snn_step: first layer must encode");
  }
  const std::vector<uint8_t>& in = state.spikes[layer_idx - 1];
  if (static_cast<int>(in.size()) != g.in_elems()) {
    throw std::invalid_argument("layer_forward_snn_step: spike input mismatch");
  }
  std::vector<int32_t> acc(g.out_elems(), 0);
  int64_t taps = 0;
  detail::for_each_tap(g, [&](int out_idx, int w_idx, int in_idx) {
    uint8_t spike = in_idx >= 0 ? in[in_idx] : 0;
    acc[out_idx] += mux_product(spike, w[w_idx]);
    ++taps;
  });
  if (ops) ops->mac_ops += 2 * taps;
  for (size_t i = 0; i < acc.size(); ++i) {
    int oc = static_cast<int>(i) / plane;
    IfResult r = if_step(u[i], layer.a[oc] * acc[i] + layer.b[oc], layer.theta);
    u[i] = r.u;
    out[i] = r.spike;
  }
}

// Full spiking forward pass: T timesteps, membranes start at theta/2,
// output-layer spike counts accumulated. `per_step` (if given) receives
// the cumulative class counts after each timestep.
template <typename PerStepFn>
std::vector<int64_t> network_forward_snn(
    const NetworkModel& model, const std::vector<double>& input, int T,
    const std::vector<std::vector<int8_t>>& sampled, PerStepFn&& per_step,
    SpikeTrace* trace = nullptr, OpCounter* ops = nullptr) {
  if (T < 1) throw std::domain_error("network_forward_snn: T must be >= 1");
  if (model.layers.empty()) {
    throw std::invalid_argument("network_forward_snn: empty model");
  }
  MembraneState state = init_membranes(model);
  const size_t n_layers = model.layers.size();
  if (trace) trace->counts.assign(n_layers, std::vector<int64_t>(T, 0));
  std::vector<int64_t> counts(model.class_count, 0);
  const auto& out_spikes = state.spikes[n_layers - 1];
  if (static_cast<int>(out_spikes.size()) != model.class_count) {
    throw std::invalid_argument("network_forward_snn: output size != classes");
  }
  for (int t = 0; t < T; ++t) {
    for (size_t l = 0; l < n_layers; ++l) {
      layer_forward_snn_step(model, l, input, state, sampled, ops);
      if (trace) {
        int64_t c = 0;
        for (uint8_t s : state.spikes[l]) c += s;
        trace->counts[l][t] = c;
      }
    }
    for (int c = 0; c < model.class_count; ++c) counts[c] += out_spikes[c];
    per_step(t, counts);
  }
  return counts;
}

inline std::vector<int64_t> network_forward_snn(
    const NetworkModel& model, const std::vector<double>& input, int T,
    const std::vector<std::vector<int8_t>>& sampled,
    SpikeTrace* trace = nullptr, OpCounter* ops = nullptr) {
  return network_forward_snn(model, input, T, sampled,
                             [](int, const std::vector<int64_t>&) {}, trace,
                             ops);
}

}  // namespace bsnn

#endif  // BSNN_NETCORE_HPP_
