#ifndef BSNN_SAMPLER_HPP_
#define BSNN_SAMPLER_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bsnn/bern.hpp"
#include "bsnn/prng.hpp"

// Probability + random byte -> {-1,+1} weight, and the mux-based
// spike-weight product. The 64-wide block sampler mirrors the hardware:
// one bank clock samples 64 weights.

namespace bsnn {

// +1 iff r < p.raw (strict), so Pr(+1) = raw/256 under a uniform byte.
inline int8_t sample_weight(Q8Prob p, uint8_t r) {
  return r < p.raw ? int8_t{1} : int8_t{-1};
}

// Weight i pairs with byte i of one bank_draw64 block, flattened index order.
inline std::array<int8_t, 64> sample_block64(std::span<const uint8_t> prob_raw,
                                             LfsrBank& bank) {
  if (prob_raw.size() != 64) {
    throw std::invalid_argument("sample_block64: expected 64 probabilities");
  }
  std::array<uint8_t, 64> rn = bank_draw64(bank);
  std::array<int8_t, 64> out;
  for (int i = 0; i < 64; ++i) {
    out[i] = sample_weight(Q8Prob{prob_raw[i]}, rn[i]);
  }
  return out;
}

// Spike is the mux select: 0 -> 0, 1 -> w. Two-bit product {-1, 0, +1}.
inline int8_t mux_product(uint8_t spike, int8_t w) {
  return spike ? w : int8_t{0};
}

// Sample a full weight tensor under a scheme. The fp32 scheme compares a
// real uniform against the full-precision probability when available
// (that is where its accuracy edge over the 8-bit schemes comes from);
// 8-bit schemes always compare a byte against the quantized probability.
inline std::vector<int8_t> sample_tensor(const BernoulliTensor& t,
                                         RngStream& rng) {
  size_t n = t.size();
  std::vector<int8_t> out(n);
  switch (rng.scheme()) {
    case RngScheme::Fp32Uniform:
      for (size_t i = 0; i < n; ++i) {
        double p = t.has_lambda() ? bern_param(t.lambda[i])
                                  : t.prob_q[i] / 256.0;
        out[i] = rng.next_real() < p ? int8_t{1} : int8_t{-1};
      }
      break;
    case RngScheme::LfsrMaxReuse: {
      if (!t.frozen()) throw std::logic_error("sample_tensor: not frozen");
      size_t i = 0;
      std::array<uint8_t, 64> padded;
      while (i < n) {
        size_t chunk = std::min<size_t>(64, n - i);
        if (chunk == 64) {
          auto block = sample_block64(
              std::span<const uint8_t>(t.prob_q.data() + i, 64), rng.bank());
          for (int j = 0; j < 64; ++j) out[i + j] = block[j];
        } else {
          padded.fill(0);
          for (size_t j = 0; j < chunk; ++j) padded[j] = t.prob_q[i + j];
          auto block = sample_block64(padded, rng.bank());
          for (size_t j = 0; j < chunk; ++j) out[i + j] = block[j];
        }
        i += chunk;
      }
      break;
    }
    default:
      if (!t.frozen()) throw std::logic_error("sample_tensor: not frozen");
      for (size_t i = 0; i < n; ++i) {
        out[i] = sample_weight(Q8Prob{t.prob_q[i]}, rng.next_byte());
      }
      break;
  }
  return out;
}

}  // namespace bsnn

#endif  // BSNN_SAMPLER_HPP_
