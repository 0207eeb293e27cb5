#ifndef BSNN_TRAIN_TOY_HPP_
#define BSNN_TRAIN_TOY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsnn/convert.hpp"
#include "bsnn/modelio.hpp"
#include "bsnn/netcore.hpp"
#include "bsnn/prng.hpp"

// Desk-scale reference trainer. Produces checkpoints with Bernoulli
// natural parameters, BN stats and trained activation step sizes so the
// conversion/inference pipeline runs end to end. The Bayesian mode is a
// simple mean-field scheme (expected-weight forward, exact gradients
// through tanh), not a variational-inference optimizer; the frequentist
// mode is sign-weight training with a straight-through estimator.

namespace bsnn::toy {

struct ToyConfig {
  std::string dataset = "stripes8x8";  // or "blobs8x8"
  int train_n = 512;
  int test_n = 512;
  int levels = 8;
  int epochs_relu = 40;
  int epochs_qrelu = 30;
  float lr = 0.05f;
  float lr_s = 0.01f;
  float momentum = 0.9f;
  int batch = 64;
  uint64_t seed = 3;
  std::string mode = "bayesian";  // or "frequentist-ste"
};

inline int dataset_classes(const std::string& kind) {
  if (kind == "stripes8x8") return 4;
  if (kind == "blobs8x8") return 2;
  throw std::invalid_argument("unknown dataset kind: " + kind);
}

namespace detail {

struct Gauss {
  CounterRng rng;
  bool has_spare = false;
  double spare = 0.0;

  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1, u2;
    do { u1 = rng.next_real(); } while (u1 <= 1e-12);
    u2 = rng.next_real();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare = mag * std::sin(2.0 * M_PI * u2);
    has_spare = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }
};

inline uint8_t to_u8(double v) {
  return static_cast<uint8_t>(std::clamp(std::lround(v * 255.0), 0l, 255l));
}

}  // namespace detail

// Deterministic synthetic 8x8 grayscale sets, label-balanced within +-1.
inline Dataset gen_dataset(const std::string& kind, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
  int classes = dataset_classes(kind);
  Dataset d;
  d.n = n;
  d.ch = 1;
  d.h = 8;
  d.w = 8;
  d.images.resize(static_cast<size_t>(n) * 64);
  d.labels.resize(n);
  detail::Gauss noise{CounterRng{derive_seed(seed, 0xDA7Aull), 0}};
  CounterRng rng{derive_seed(seed, 0xDA7A2ull), 0};
  for (int i = 0; i < n; ++i) {
    int label = i % classes;
    d.labels[i] = label;
    uint8_t* img = d.images.data() + static_cast<size_t>(i) * 64;
    int phase = static_cast<int>(rng.next_u64() % 2);
    double lo = 0.2, hi = 0.8;
    double jitter = 0.06 * (rng.next_real() - 0.5);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        double base;
        if (kind == "stripes8x8") {
          int on = 0;
          switch (label) {
            case 0: on = (y + phase) % 2; break;                // horizontal
            case 1: on = (x + phase) % 2; break;                // vertical
            case 2: on = (x + y + phase) % 2; break;            // checker
            default: on = ((x + y) / 2 + phase) % 2; break;     // diagonal bands
          }
          base = on ? hi : lo;
        } else {  // blobs8x8: bump in opposite quadrants
          double cx = label == 0 ? 2.0 : 5.0;
          double cy = label == 0 ? 2.0 : 5.0;
          cx += phase ? 0.5 : -0.5;
          cy += phase ? -0.5 : 0.5;
          double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          base = lo + (hi - lo) * std::exp(-r2 / 4.0);
        }
        double v = base + jitter + 0.12 * noise.next();
        img[y * 8 + x] = detail::to_u8(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return d;
}

namespace detail {

struct ConvLayerT {
  Geometry g;
  std::vector<float> param;  // lambda (bayesian) or latent weight (freq)
  std::vector<float> vel;
  std::vector<float> w;      // realized weights for the current step
  std::vector<float> gamma, beta, vg, vb;
  float s = 1.0f;            // qrelu step size
  float vs = 0.0f;

  // caches
  std::vector<float> in, acc, xhat, preact, out;
  std::vector<float> bn_mean, bn_istd;
};

// Bayesian training runs the forward pass on binary weights sampled from
// p = sigmoid(2*lambda); the gradient is taken straight through the
// sample onto the expected weight tanh(lambda). Sampling during training
// is what drives the useful lambdas toward saturation. `rng == nullptr`
// selects the expected-weight (mean-field) realization instead.
inline void realize_weights(ConvLayerT& l, bool bayesian, CounterRng* rng) {
  l.w.resize(l.param.size());
  for (size_t i = 0; i < l.param.size(); ++i) {
    if (!bayesian) {
      l.w[i] = l.param[i] >= 0.0f ? 1.0f : -1.0f;
    } else if (rng) {
      double p = 1.0 / (1.0 + std::exp(-2.0 * l.param[i]));
      l.w[i] = rng->next_real() < p ? 1.0f : -1.0f;
    } else {
      l.w[i] = std::tanh(l.param[i]);
    }
  }
}

inline void conv_forward(const Geometry& g, const std::vector<float>& x,
                         const std::vector<float>& w, std::vector<float>& y,
                         int batch) {
  y.assign(static_cast<size_t>(batch) * g.out_elems(), 0.0f);
  const int in_sz = g.in_elems(), out_sz = g.out_elems();
  for (int b = 0; b < batch; ++b) {
    const float* xi = x.data() + static_cast<size_t>(b) * in_sz;
    float* yi = y.data() + static_cast<size_t>(b) * out_sz;
    bsnn::detail::for_each_tap(g, [&](int out_idx, int w_idx, int in_idx) {
      if (in_idx >= 0) yi[out_idx] += w[w_idx] * xi[in_idx];
    });
  }
}

inline void conv_backward(const Geometry& g, const std::vector<float>& x,
                          const std::vector<float>& w,
                          const std::vector<float>& dy, std::vector<float>& dx,
                          std::vector<float>& dw, int batch) {
  dx.assign(x.size(), 0.0f);
  dw.assign(w.size(), 0.0f);
  const int in_sz = g.in_elems(), out_sz = g.out_elems();
  for (int b = 0; b < batch; ++b) {
    const float* xi = x.data() + static_cast<size_t>(b) * in_sz;
    const float* dyi = dy.data() + static_cast<size_t>(b) * out_sz;
    float* dxi = dx.data() + static_cast<size_t>(b) * in_sz;
    bsnn::detail::for_each_tap(g, [&](int out_idx, int w_idx, int in_idx) {
      if (in_idx >= 0) {
        dw[w_idx] += dyi[out_idx] * xi[in_idx];
        dxi[in_idx] += dyi[out_idx] * w[w_idx];
      }
    });
  }
}

// Batch norm over (batch, spatial) per channel; caches for backward.
inline void bn_forward(ConvLayerT& l, int batch, float eps) {
  const Geometry& g = l.g;
  const int plane = g.out_h() * g.out_w();
  const int out_sz = g.out_elems();
  l.bn_mean.assign(g.out_ch, 0.0f);
  l.bn_istd.assign(g.out_ch, 0.0f);
  l.xhat.assign(l.acc.size(), 0.0f);
  l.preact.assign(l.acc.size(), 0.0f);
  const int64_t n_per_ch = static_cast<int64_t>(batch) * plane;
  for (int c = 0; c < g.out_ch; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int b = 0; b < batch; ++b) {
      const float* a = l.acc.data() + static_cast<size_t>(b) * out_sz + c * plane;
      for (int i = 0; i < plane; ++i) { sum += a[i]; sq += a[i] * a[i]; }
    }
    double mean = sum / n_per_ch;
    double var = sq / n_per_ch - mean * mean;
    if (var < 0) var = 0;
    l.bn_mean[c] = static_cast<float>(mean);
    l.bn_istd[c] = static_cast<float>(1.0 / std::sqrt(var + eps));
    for (int b = 0; b < batch; ++b) {
      size_t base = static_cast<size_t>(b) * out_sz + c * plane;
      for (int i = 0; i < plane; ++i) {
        float xh = (l.acc[base + i] - l.bn_mean[c]) * l.bn_istd[c];
        l.xhat[base + i] = xh;
        l.preact[base + i] = l.gamma[c] * xh + l.beta[c];
      }
    }
  }
}

inline void bn_backward(ConvLayerT& l, int batch, const std::vector<float>& dpre,
                        std::vector<float>& dacc, std::vector<float>& dgamma,
                        std::vector<float>& dbeta) {
  const Geometry& g = l.g;
  const int plane = g.out_h() * g.out_w();
  const int out_sz = g.out_elems();
  dacc.assign(l.acc.size(), 0.0f);
  dgamma.assign(g.out_ch, 0.0f);
  dbeta.assign(g.out_ch, 0.0f);
  const double n_per_ch = static_cast<double>(batch) * plane;
  for (int c = 0; c < g.out_ch; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < batch; ++b) {
      size_t base = static_cast<size_t>(b) * out_sz + c * plane;
      for (int i = 0; i < plane; ++i) {
        sum_dy += dpre[base + i];
        sum_dy_xhat += dpre[base + i] * l.xhat[base + i];
      }
    }
    dgamma[c] = static_cast<float>(sum_dy_xhat);
    dbeta[c] = static_cast<float>(sum_dy);
    double k = l.gamma[c] * l.bn_istd[c];
    for (int b = 0; b < batch; ++b) {
      size_t base = static_cast<size_t>(b) * out_sz + c * plane;
      for (int i = 0; i < plane; ++i) {
        dacc[base + i] = static_cast<float>(
            k * (dpre[base + i] - sum_dy / n_per_ch -
                 l.xhat[base + i] * sum_dy_xhat / n_per_ch));
      }
    }
  }
}

}  // namespace detail

class ToyTrainer {
 public:
  explicit ToyTrainer(const ToyConfig& cfg)
      : cfg_(cfg),
        bayesian_(cfg.mode == "bayesian"),
        rng_{derive_seed(cfg.seed, 0x7EA1ull), 0} {
    if (cfg.mode != "bayesian" && cfg.mode != "frequentist-ste") {
      throw std::invalid_argument("train: unknown mode " + cfg.mode);
    }
    if (cfg.levels < 2) throw std::invalid_argument("train: L must be >= 2");
    classes_ = dataset_classes(cfg.dataset);
    // EncoderConv(1->8, 3x3, s2) -> BinaryConv(8->16, 3x3, s2) -> BinaryFc
    layers_.resize(3);
    layers_[0].g = Geometry{1, 8, 3, 3, 2, 1, 8, 8};
    layers_[1].g = Geometry{8, 16, 3, 3, 2, 1, 4, 4};
    layers_[2].g = Geometry::fc(16 * 2 * 2, classes_);
    for (auto& l : layers_) {
      l.param.resize(l.g.weight_count());
      l.vel.assign(l.param.size(), 0.0f);
      for (auto& p : l.param) {
        p = static_cast<float>((rng_.next_real() - 0.5) * 0.4);
      }
      l.gamma.assign(l.g.out_ch, 1.0f);
      l.beta.assign(l.g.out_ch, 0.0f);
      l.vg.assign(l.g.out_ch, 0.0f);
      l.vb.assign(l.g.out_ch, 0.0f);
    }
  }

  // Returns per-epoch mean training losses (ReLU phase then qrelu phase).
  // The ReLU phase runs on expected weights tanh(lambda); before the
  // quantized fine-tune the lambdas are sharpened (a deterministic
  // temperature drop that keeps the relative uncertainty ordering) and
  // the forward pass switches to sampled binary weights so BN and the
  // step sizes adapt to what deployment actually sees.
  std::vector<double> fit(const Dataset& train) {
    std::vector<double> losses;
    for (int e = 0; e < cfg_.epochs_relu; ++e) {
      losses.push_back(run_epoch(train, /*quantized=*/false));
    }
    if (bayesian_) {
      sharpen_lambdas();
      sample_forward_ = true;
    }
    init_step_sizes(train);
    for (int e = 0; e < cfg_.epochs_qrelu; ++e) {
      losses.push_back(run_epoch(train, /*quantized=*/true));
    }
    return losses;
  }

  AnnCheckpoint checkpoint(const Dataset& train) {
    AnnCheckpoint ckpt;
    ckpt.levels = cfg_.levels;
    ckpt.input_ch = 1;
    ckpt.input_h = 8;
    ckpt.input_w = 8;
    ckpt.class_count = classes_;
    ckpt.bn_eps = kEps;
    // Full-train-set BN statistics for deployment.
    std::vector<std::vector<float>> mus, vars;
    population_bn_stats(train, mus, vars);
    for (size_t li = 0; li < layers_.size(); ++li) {
      detail::ConvLayerT& l = layers_[li];
      AnnLayer al;
      al.kind = li == 0 ? LayerKind::EncoderConv
                        : (li + 1 == layers_.size() ? LayerKind::BinaryFc
                                                    : LayerKind::BinaryConv);
      al.geom = l.g;
      al.lambda.resize(l.param.size());
      for (size_t i = 0; i < l.param.size(); ++i) {
        // Frequentist sign weights map to saturated Bernoulli parameters.
        al.lambda[i] = bayesian_ ? l.param[i]
                                 : (l.param[i] >= 0.0f ? 12.0f : -12.0f);
      }
      al.gamma = l.gamma;
      al.beta = l.beta;
      al.mu = mus[li];
      al.var = vars[li];
      al.step = l.s;
      ckpt.layers.push_back(std::move(al));
    }
    return ckpt;
  }

 private:
  static constexpr float kEps = 1e-5f;

  double run_epoch(const Dataset& data, bool quantized) {
    const int n = data.n;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng_.next_u64() % (i + 1));
      std::swap(order[i], order[j]);
    }
    double loss_sum = 0.0;
    int seen = 0;
    for (int start = 0; start < n; start += cfg_.batch) {
      int bsz = std::min(cfg_.batch, n - start);
      std::vector<float> x(static_cast<size_t>(bsz) * 64);
      std::vector<int> y(bsz);
      for (int b = 0; b < bsz; ++b) {
        int idx = order[start + b];
        const uint8_t* img = data.images.data() + static_cast<size_t>(idx) * 64;
        for (int k = 0; k < 64; ++k) x[b * 64 + k] = img[k] / 255.0f;
        y[b] = data.labels[idx];
      }
      loss_sum += train_batch(x, y, bsz, quantized) * bsz;
      seen += bsz;
    }
    double mean_loss = loss_sum / seen;
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("train: loss diverged (mode=" + cfg_.mode +
                               ", seed=" + std::to_string(cfg_.seed) + ")");
    }
    return mean_loss;
  }

  double train_batch(const std::vector<float>& x, const std::vector<int>& y,
                     int bsz, bool quantized) {
    // forward
    const std::vector<float>* cur = &x;
    for (auto& l : layers_) {
      detail::realize_weights(l, bayesian_, (bayesian_ && sample_forward_) ? &rng_ : nullptr);
      l.in = *cur;
      detail::conv_forward(l.g, l.in, l.w, l.acc, bsz);
      detail::bn_forward(l, bsz, kEps);
      l.out.resize(l.preact.size());
      for (size_t i = 0; i < l.preact.size(); ++i) {
        l.out[i] = quantized
                       ? static_cast<float>(qrelu(l.preact[i], l.s, cfg_.levels))
                       : std::max(l.preact[i], 0.0f);
      }
      cur = &l.out;
    }
    // softmax cross-entropy on the final activations
    const std::vector<float>& logits = layers_.back().out;
    std::vector<float> dlogits(logits.size());
    double loss = 0.0;
    for (int b = 0; b < bsz; ++b) {
      const float* lo = logits.data() + static_cast<size_t>(b) * classes_;
      float* dl = dlogits.data() + static_cast<size_t>(b) * classes_;
      float mx = *std::max_element(lo, lo + classes_);
      double z = 0.0;
      for (int c = 0; c < classes_; ++c) z += std::exp(lo[c] - mx);
      for (int c = 0; c < classes_; ++c) {
        double p = std::exp(lo[c] - mx) / z;
        dl[c] = static_cast<float>((p - (y[b] == c ? 1.0 : 0.0)) / bsz);
      }
      loss -= std::log(std::exp(lo[y[b]] - mx) / z + 1e-12);
    }
    loss /= bsz;

    // backward
    std::vector<float> dout = dlogits;
    for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
      detail::ConvLayerT& l = layers_[li];
      std::vector<float> dpre(l.preact.size());
      float ds = 0.0f;
      const float s = l.s;
      const int L = cfg_.levels;
      for (size_t i = 0; i < l.preact.size(); ++i) {
        float v = l.preact[i];
        if (quantized) {
          float qn = static_cast<float>(qrelu(v, s, L)) / s;  // in [0,1]
          bool in_range = v > -s / (2.0f * L) && v < s * (1.0f - 0.5f / L);
          dpre[i] = in_range ? dout[i] : 0.0f;
          ds += dout[i] * (in_range ? qn - v / s : qn);
        } else {
          dpre[i] = v > 0.0f ? dout[i] : 0.0f;
        }
      }
      std::vector<float> dacc, dgamma, dbeta, dx, dw;
      detail::bn_backward(l, bsz, dpre, dacc, dgamma, dbeta);
      detail::conv_backward(l.g, l.in, l.w, dacc, dx, dw, bsz);
      // chain into lambda (tanh) or latent weight (STE with clip)
      for (size_t i = 0; i < l.param.size(); ++i) {
        float wbar = bayesian_ ? std::tanh(l.param[i]) : 0.0f;
        float g = bayesian_ ? dw[i] * (1.0f - wbar * wbar)
                            : (std::fabs(l.param[i]) <= 1.0f ? dw[i] : 0.0f);
        l.vel[i] = cfg_.momentum * l.vel[i] - cfg_.lr * g;
        l.param[i] += l.vel[i];
      }
      for (int c = 0; c < l.g.out_ch; ++c) {
        l.vg[c] = cfg_.momentum * l.vg[c] - cfg_.lr * dgamma[c];
        l.gamma[c] += l.vg[c];
        l.vb[c] = cfg_.momentum * l.vb[c] - cfg_.lr * dbeta[c];
        l.beta[c] += l.vb[c];
      }
      if (quantized) {
        l.vs = cfg_.momentum * l.vs - cfg_.lr_s * ds;
        l.s = std::max(l.s + l.vs, 1e-3f);
      }
      dout = std::move(dx);
    }
    return loss;
  }

  // Scale all lambdas by one global factor so the mean expected-weight
  // magnitude reaches ~0.85. Weights the mean-field phase left undecided
  // stay near p = 0.5; confident ones saturate.
  void sharpen_lambdas() {
    double lo = 1.0, hi = 4096.0;
    auto mean_abs = [&](double k) {
      double acc = 0.0;
      size_t n = 0;
      for (const auto& l : layers_) {
        for (float p : l.param) { acc += std::fabs(std::tanh(k * p)); ++n; }
      }
      return acc / n;
    };
    if (mean_abs(hi) < 0.85) {
      lo = hi;
    } else {
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (mean_abs(mid) < 0.85 ? lo : hi) = mid;
      }
    }
    float k = static_cast<float>(0.5 * (lo + hi));
    for (auto& l : layers_) {
      for (auto& p : l.param) p *= k;
    }
  }

  // Initialize qrelu step sizes from the ReLU-phase activation range.
  void init_step_sizes(const Dataset& data) {
    std::vector<float> x(static_cast<size_t>(data.n) * 64);
    for (int i = 0; i < data.n; ++i) {
      const uint8_t* img = data.images.data() + static_cast<size_t>(i) * 64;
      for (int k = 0; k < 64; ++k) x[i * 64 + k] = img[k] / 255.0f;
    }
    const std::vector<float>* cur = &x;
    for (auto& l : layers_) {
      detail::realize_weights(l, bayesian_, (bayesian_ && sample_forward_) ? &rng_ : nullptr);
      l.in = *cur;
      detail::conv_forward(l.g, l.in, l.w, l.acc, data.n);
      detail::bn_forward(l, data.n, kEps);
      float mx = 0.0f;
      for (float v : l.preact) mx = std::max(mx, v);
      l.s = std::max(mx, 0.1f);
      l.out.resize(l.preact.size());
      for (size_t i = 0; i < l.preact.size(); ++i) {
        l.out[i] = std::max(l.preact[i], 0.0f);
      }
      cur = &l.out;
    }
  }

  void population_bn_stats(const Dataset& data,
                           std::vector<std::vector<float>>& mus,
                           std::vector<std::vector<float>>& vars) {
    std::vector<float> x(static_cast<size_t>(data.n) * 64);
    for (int i = 0; i < data.n; ++i) {
      const uint8_t* img = data.images.data() + static_cast<size_t>(i) * 64;
      for (int k = 0; k < 64; ++k) x[i * 64 + k] = img[k] / 255.0f;
    }
    mus.assign(layers_.size(), {});
    vars.assign(layers_.size(), {});
    // Pool statistics over several sampled weight realizations so the
    // stored BN stats reflect what the deployed (sampled) network sees.
    const int realizations = bayesian_ ? 4 : 1;
    std::vector<std::vector<double>> sum(layers_.size()), sq(layers_.size());
    for (size_t li = 0; li < layers_.size(); ++li) {
      sum[li].assign(layers_[li].g.out_ch, 0.0);
      sq[li].assign(layers_[li].g.out_ch, 0.0);
    }
    CounterRng stats_rng{derive_seed(cfg_.seed, 0xB57A75ull), 0};
    for (int r = 0; r < realizations; ++r) {
      const std::vector<float>* cur = &x;
      for (size_t li = 0; li < layers_.size(); ++li) {
        detail::ConvLayerT& l = layers_[li];
        detail::realize_weights(l, bayesian_, bayesian_ ? &stats_rng : nullptr);
        l.in = *cur;
        detail::conv_forward(l.g, l.in, l.w, l.acc, data.n);
        const int plane = l.g.out_h() * l.g.out_w();
        const int out_sz = l.g.out_elems();
        for (int c = 0; c < l.g.out_ch; ++c) {
          for (int b = 0; b < data.n; ++b) {
            const float* a = l.acc.data() + static_cast<size_t>(b) * out_sz + c * plane;
            for (int i = 0; i < plane; ++i) {
              sum[li][c] += a[i];
              sq[li][c] += static_cast<double>(a[i]) * a[i];
            }
          }
        }
        detail::bn_forward(l, data.n, kEps);
        l.out.resize(l.preact.size());
        for (size_t i = 0; i < l.preact.size(); ++i) {
          l.out[i] = static_cast<float>(qrelu(l.preact[i], l.s, cfg_.levels));
        }
        cur = &l.out;
      }
    }
    for (size_t li = 0; li < layers_.size(); ++li) {
      const detail::ConvLayerT& l = layers_[li];
      const double n_per_ch = static_cast<double>(realizations) * data.n *
                              l.g.out_h() * l.g.out_w();
      mus[li].resize(l.g.out_ch);
      vars[li].resize(l.g.out_ch);
      for (int c = 0; c < l.g.out_ch; ++c) {
        double mean = sum[li][c] / n_per_ch;
        double var = sq[li][c] / n_per_ch - mean * mean;
        mus[li][c] = static_cast<float>(mean);
        vars[li][c] = static_cast<float>(var < 0 ? 0 : var);
      }
    }
  }

  ToyConfig cfg_;
  bool bayesian_;
  bool sample_forward_ = false;
  CounterRng rng_;
  int classes_;
  std::vector<detail::ConvLayerT> layers_;
};

struct TrainResult {
  AnnCheckpoint checkpoint;
  std::vector<double> losses;
};

inline TrainResult train(const ToyConfig& cfg, const Dataset& train_set) {
  ToyTrainer trainer(cfg);
  TrainResult res;
  res.losses = trainer.fit(train_set);
  res.checkpoint = trainer.checkpoint(train_set);
  return res;
}

inline TrainResult train(const ToyConfig& cfg) {
  Dataset train_set = gen_dataset(cfg.dataset, cfg.train_n, cfg.seed);
  return train(cfg, train_set);
}

// Quantized-ReLU ANN evaluation of a checkpoint with expected weights
// (2p - 1) and the stored population BN statistics.
inline double eval_ann(const AnnCheckpoint& ckpt, const Dataset& data) {
  int correct = 0;
  for (int i = 0; i < data.n; ++i) {
    std::vector<double> cur(64);
    const uint8_t* img = data.images.data() + static_cast<size_t>(i) * 64;
    for (int k = 0; k < 64; ++k) cur[k] = img[k] / 255.0;
    for (const AnnLayer& al : ckpt.layers) {
      LayerSpec ls;
      ls.kind = al.kind;
      ls.geom = al.geom;
      ls.levels = ckpt.levels;
      ls.step = al.step;
      ls.a.resize(al.geom.out_ch);
      ls.b.resize(al.geom.out_ch);
      for (int c = 0; c < al.geom.out_ch; ++c) {
        FoldedBnReal f = fold_bn(al.gamma[c], al.beta[c], al.mu[c], al.var[c],
                                 ckpt.bn_eps);
        ls.a[c] = f.a;
        ls.b[c] = f.b + (al.bias.empty() ? 0.0 : f.a * al.bias[c]);
      }
      std::vector<double> w(al.lambda.size());
      for (size_t k = 0; k < w.size(); ++k) w[k] = std::tanh(al.lambda[k]);
      cur = layer_forward_ann(ls, cur, w);
    }
    int pred = static_cast<int>(
        std::max_element(cur.begin(), cur.end()) - cur.begin());
    if (pred == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / data.n;
}

}  // namespace bsnn::toy

#endif  // BSNN_TRAIN_TOY_HPP_
