#ifndef BSNN_FXP_HPP_
#define BSNN_FXP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Fixed-point types for the 8-bit deployment path. Probabilities are
// stored as raw/256; everything else uses an 8-bit mantissa with a
// shared power-of-two exponent so requantization is a pure shift.

namespace bsnn {

// Probability quantized to raw/256. p = 1 is representable only as 255/256,
// matching an 8-bit comparator against an 8-bit uniform random byte.
struct Q8Prob {
  uint8_t raw = 0;

  double value() const { return raw / 256.0; }
};

// mantissa * 2^exponent, mantissa in [-128, 127].
struct QAffine {
  int8_t mantissa = 0;
  int exponent = 0;

  double decode() const { return mantissa * std::ldexp(1.0, exponent); }
};

// 32-bit signed accumulator in the layer's pre-activation scale.
struct Acc32 {
  int32_t value = 0;
};

// Round half to even; input must already be within int64 range.
inline int64_t round_half_even(double x) {
  return static_cast<int64_t>(std::nearbyint(x));
}

inline Q8Prob quantize_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("quantize_prob: p outside [0,1]");
  }
  int64_t raw = round_half_even(p * 256.0);
  raw = std::clamp<int64_t>(raw, 0, 255);
  return Q8Prob{static_cast<uint8_t>(raw)};
}

struct QAffineVec {
  std::vector<int8_t> mantissas;
  int exponent = 0;

  double decode(size_t i) const {
    return mantissas[i] * std::ldexp(1.0, exponent);
  }
  std::vector<double> decode_all() const {
    std::vector<double> out(mantissas.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = decode(i);
    return out;
  }
};

// Shared exponent e is the smallest integer with max|v| / 2^e <= 127.
inline QAffineVec quantize_affine(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::domain_error("quantize_affine: empty vector");
  }
  double max_abs = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::domain_error("quantize_affine: non-finite value");
    }
    max_abs = std::max(max_abs, std::fabs(v));
  }
  QAffineVec out;
  out.mantissas.resize(values.size());
  if (max_abs == 0.0) {
    out.exponent = 0;
    return out;
  }
  int e = static_cast<int>(std::ceil(std::log2(max_abs / 127.0)));
  while (max_abs * std::ldexp(1.0, -e) > 127.0) ++e;
  while (max_abs * std::ldexp(1.0, -(e - 1)) <= 127.0) --e;
  out.exponent = e;
  for (size_t i = 0; i < values.size(); ++i) {
    int64_t m = round_half_even(values[i] * std::ldexp(1.0, -e));
    out.mantissas[i] = static_cast<int8_t>(std::clamp<int64_t>(m, -128, 127));
  }
  return out;
}

inline QAffine quantize_affine_scalar(double v) {
  QAffineVec q = quantize_affine(std::vector<double>{v});
  return QAffine{q.mantissas[0], q.exponent};
}

// Round-to-nearest-even shift into 8 bits with saturation at +/-127.
inline int8_t requantize(Acc32 acc, int out_exponent) {
  double shifted = acc.value * std::ldexp(1.0, -out_exponent);
  int64_t r = round_half_even(shifted);
  return static_cast<int8_t>(std::clamp<int64_t>(r, -127, 127));
}

}  // namespace bsnn

#endif  // BSNN_FXP_HPP_
