#ifndef BSNN_BERN_HPP_
#define BSNN_BERN_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bsnn/fxp.hpp"

// Bernoulli weight parameterization: p = sigmoid(2*lambda). Training
// carries the natural parameters; deployment carries only the 8-bit
// quantized probabilities.

namespace bsnn {

inline double bern_param(double lambda) {
  if (!std::isfinite(lambda)) {
    throw std::domain_error("bern_param: non-finite lambda");
  }
  return 1.0 / (1.0 + std::exp(-2.0 * lambda));
}

struct BernoulliTensor {
  std::vector<float> lambda;    // natural parameters, optional after freeze
  std::vector<uint8_t> prob_q;  // Q8Prob raws, present on deployable models

  size_t size() const { return prob_q.empty() ? lambda.size() : prob_q.size(); }
  bool has_lambda() const { return !lambda.empty(); }
  bool frozen() const { return !prob_q.empty(); }
};

inline BernoulliTensor freeze(const std::vector<float>& lambda,
                              bool keep_lambda = true) {
  BernoulliTensor t;
  if (keep_lambda) t.lambda = lambda;
  t.prob_q.resize(lambda.size());
  for (size_t i = 0; i < lambda.size(); ++i) {
    t.prob_q[i] = quantize_prob(bern_param(lambda[i])).raw;
  }
  return t;
}

inline BernoulliTensor& freeze(BernoulliTensor& t) {
  if (!t.frozen()) {
    t.prob_q.resize(t.lambda.size());
    for (size_t i = 0; i < t.lambda.size(); ++i) {
      t.prob_q[i] = quantize_prob(bern_param(t.lambda[i])).raw;
    }
  }
  return t;
}

}  // namespace bsnn

#endif  // BSNN_BERN_HPP_
