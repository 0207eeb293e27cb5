#ifndef BSNN_CONVERT_HPP_
#define BSNN_CONVERT_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsnn/netcore.hpp"

// ANN -> SNN conversion and 8-bit model quantization. The quantized-ReLU
// activation of each layer becomes IF dynamics with theta = s and initial
// membrane theta/2; the previous layer's activation scale is absorbed
// into the folded-BN multiplier so weights stay binary.

namespace bsnn {

struct AnnLayer {
  LayerKind kind = LayerKind::BinaryConv;
  Geometry geom;
  std::vector<float> lambda;  // natural parameters (empty for ResidualAdd)
  std::vector<float> gamma, beta, mu, var;  // raw BN stats per channel
  std::vector<float> bias;                  // folded into the BN offset
  float step = 1.0f;                        // s^l
  int skip_from = -1;
};

struct AnnCheckpoint {
  std::vector<AnnLayer> layers;
  int levels = 8;  // one L shared by the whole network
  int input_ch = 1, input_h = 8, input_w = 8;
  int class_count = 2;
  float bn_eps = 1e-5f;
};

// theta = s^l, U0 = theta/2, BN folded, previous spiking layer's scale
// absorbed into this layer's multiplier. The absorbed factor is s^(l-1)
// itself: a spike from the previous layer stands for an activation
// quantum of s^(l-1), delivered once per emission, so the per-timestep
// input current reproduces the ANN pre-activation on average for any
// runtime T. Conversion is therefore independent of T, which stays a
// free inference knob.
inline NetworkModel convert_to_snn(const AnnCheckpoint& ann, int T = 0) {
  if (ann.layers.empty()) throw std::invalid_argument("convert: empty checkpoint");
  NetworkModel model;
  model.input_ch = ann.input_ch;
  model.input_h = ann.input_h;
  model.input_w = ann.input_w;
  model.class_count = ann.class_count;
  model.default_T = T > 0 ? T : ann.levels;
  model.deploy = false;

  double prev_scale = 1.0;  // encoder consumes the analog frame directly
  for (size_t li = 0; li < ann.layers.size(); ++li) {
    const AnnLayer& al = ann.layers[li];
    if (!(al.step > 0.0f)) {
      throw std::invalid_argument("convert: missing step size at layer " +
                                  std::to_string(li));
    }
    LayerSpec ls;
    ls.kind = al.kind;
    ls.geom = al.geom;
    ls.skip_from = al.skip_from;
    ls.levels = ann.levels;
    ls.step = al.step;
    ls.theta = al.step;
    if (al.kind != LayerKind::ResidualAdd) {
      ls.weight.lambda = al.lambda;
      if (static_cast<int>(al.lambda.size()) != al.geom.weight_count()) {
        throw std::invalid_argument("convert: weight shape mismatch at layer " +
                                    std::to_string(li));
      }
    }
    int channels = al.geom.out_ch;
    if (static_cast<int>(al.gamma.size()) != channels) {
      throw std::invalid_argument("convert: BN shape mismatch at layer " +
                                  std::to_string(li));
    }
    ls.a.resize(channels);
    ls.b.resize(channels);
    for (int c = 0; c < channels; ++c) {
      FoldedBnReal f = fold_bn(al.gamma[c], al.beta[c], al.mu[c], al.var[c],
                               ann.bn_eps);
      double bias = al.bias.empty() ? 0.0 : al.bias[c];
      ls.a[c] = f.a * prev_scale;
      ls.b[c] = f.b + f.a * bias;
    }
    model.layers.push_back(std::move(ls));
    prev_scale = al.step;
  }
  return model;
}

// Quantize a converted real-valued model into the 8-bit deployment form:
// probabilities frozen to Q8, BN pairs and theta to shared-exponent
// 8-bit mantissas. Effective coefficients are re-decoded from the
// quantized values so deploy-mode inference is bit-exact against them.
inline NetworkModel quantize_model(const NetworkModel& real_model) {
  NetworkModel m = real_model;
  for (size_t li = 0; li < m.layers.size(); ++li) {
    LayerSpec& l = m.layers[li];
    if (l.has_weights()) {
      if (!l.weight.frozen()) freeze(l.weight);
    }
    l.a_q = quantize_affine(l.a);
    l.b_q = quantize_affine(l.b);
    l.theta_q = quantize_affine_scalar(l.theta);
    if (!(l.theta_q.decode() > 0.0)) {
      throw std::runtime_error("quantize_model: theta underflows at layer " +
                               std::to_string(li));
    }
    l.a = l.a_q.decode_all();
    l.b = l.b_q.decode_all();
    l.theta = l.theta_q.decode();
  }
  m.deploy = true;
  return m;
}

}  // namespace bsnn

#endif  // BSNN_CONVERT_HPP_
