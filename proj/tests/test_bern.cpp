#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bsnn/bern.hpp"
#include "bsnn/prng.hpp"

using namespace bsnn;

TEST_CASE("bern_param anchor values") {
  CHECK(bern_param(0.0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(bern_param(0.5) == Catch::Approx(0.731058578630005).margin(1e-12));
  CHECK(bern_param(20.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(bern_param(-20.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("bern_param is antisymmetric about 0.5") {
  for (double lam = -6.0; lam <= 6.0; lam += 0.037) {
    CHECK(bern_param(lam) + bern_param(-lam) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("bern_param matches the expected weight tanh(lambda)") {
  for (double lam = -6.0; lam <= 6.0; lam += 0.041) {
    double mean_w = 2.0 * bern_param(lam) - 1.0;
    CHECK(mean_w == Catch::Approx(std::tanh(lam)).margin(1e-12));
  }
}

TEST_CASE("bern_param rejects non-finite input") {
  CHECK_THROWS_AS(bern_param(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(bern_param(INFINITY), std::domain_error);
}

TEST_CASE("freeze quantizes probabilities and keeps lambda on request") {
  std::vector<float> lam{0.0f, 0.5f, 100.0f, -100.0f};
  BernoulliTensor t = freeze(lam);
  REQUIRE(t.frozen());
  CHECK(t.has_lambda());
  CHECK(t.prob_q[0] == 128);
  CHECK(t.prob_q[1] == 187);  // round(0.731059 * 256)
  CHECK(t.prob_q[2] == 255);  // p = 1 clamps
  CHECK(t.prob_q[3] == 0);

  BernoulliTensor deploy = freeze(lam, /*keep_lambda=*/false);
  CHECK_FALSE(deploy.has_lambda());
  CHECK(deploy.prob_q == t.prob_q);
  CHECK(deploy.size() == 4);
}

TEST_CASE("in-place freeze is idempotent") {
  BernoulliTensor t;
  t.lambda = {1.0f, -2.0f, 0.25f};
  freeze(t);
  std::vector<uint8_t> first = t.prob_q;
  freeze(t);
  CHECK(t.prob_q == first);
}

TEST_CASE("freezing preserves which weight is most likely positive") {
  CounterRng rng{77, 0};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<float> lam(16);
    for (auto& v : lam) v = static_cast<float>((rng.next_real() - 0.5) * 8.0);
    BernoulliTensor t = freeze(lam);
    size_t arg_lam = 0, arg_q = 0;
    for (size_t i = 1; i < lam.size(); ++i) {
      if (lam[i] > lam[arg_lam]) arg_lam = i;
      if (t.prob_q[i] > t.prob_q[arg_q]) arg_q = i;
    }
    // quantization can tie but never reorder: the max-lambda entry must
    // still hold the max quantized probability
    CHECK(t.prob_q[arg_lam] == t.prob_q[arg_q]);
  }
}
