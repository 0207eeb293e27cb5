#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "bsnn/bayes.hpp"

using namespace bsnn;

namespace {

// encoder fc(2 -> 4) into binary fc(4 -> 2), mid-range probabilities so
// Monte-Carlo members actually differ
NetworkModel tiny_model() {
  NetworkModel m;
  m.input_ch = 1;
  m.input_h = 1;
  m.input_w = 2;
  m.class_count = 2;
  LayerSpec enc;
  enc.kind = LayerKind::EncoderConv;
  enc.geom = Geometry::fc(2, 4);
  LayerSpec fc;
  fc.kind = LayerKind::BinaryFc;
  fc.geom = Geometry::fc(4, 2);
  m.layers = {enc, fc};
  CounterRng rng{5150, 0};
  for (auto& l : m.layers) {
    l.a.assign(l.geom.out_ch, 0.8);
    l.b.assign(l.geom.out_ch, 0.1);
    l.theta = 1.0;
    l.step = 1.0;
    l.levels = 8;
    l.weight.prob_q.resize(l.geom.weight_count());
    for (auto& p : l.weight.prob_q) {
      p = static_cast<uint8_t>(64 + rng.next_u64() % 128);
    }
  }
  return m;
}

Dataset tiny_data(int n) {
  Dataset d;
  d.n = n;
  d.ch = 1;
  d.h = 1;
  d.w = 2;
  CounterRng rng{41, 0};
  d.images.resize(2 * n);
  for (auto& b : d.images) b = rng.next_byte();
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) d.labels[i] = i % 2;
  return d;
}

std::string preds_fingerprint(const std::vector<PredictionRecord>& preds) {
  std::string s;
  for (const auto& p : preds) {
    s += std::to_string(p.predicted) + ":";
    for (int64_t c : p.counts) s += std::to_string(c) + ",";
    s += ";";
  }
  return s;
}

}  // namespace

TEST_CASE("softmax anchors") {
  std::vector<double> p = softmax({10.0, 2.0, 0.0});
  CHECK(p[0] + p[1] + p[2] == Catch::Approx(1.0).margin(1e-12));
  CHECK(p[1] / p[0] == Catch::Approx(std::exp(-8.0)).margin(1e-15));
  CHECK(p[2] / p[0] == Catch::Approx(std::exp(-10.0)).margin(1e-15));
  std::vector<double> q = softmax({3.0, 3.0});
  CHECK(q[0] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("combine: symmetric members give a symmetric posterior") {
  std::vector<std::vector<int64_t>> members{{3, 0}, {0, 3}};
  for (CombineMode mode : {CombineMode::SumThenSoftmax, CombineMode::MeanSoftmax}) {
    std::vector<double> p = combine(members, mode);
    CHECK(p[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(p[1] == Catch::Approx(0.5).margin(1e-12));
  }
  CHECK_THROWS_AS(combine({}), std::invalid_argument);
  CHECK_THROWS_AS(combine({{1, 2}, {1}}), std::invalid_argument);
}

TEST_CASE("combine is invariant to member order") {
  std::vector<std::vector<int64_t>> members{{5, 1}, {2, 4}, {3, 3}, {0, 6}};
  std::vector<std::vector<int64_t>> reversed(members.rbegin(), members.rend());
  for (CombineMode mode : {CombineMode::SumThenSoftmax, CombineMode::MeanSoftmax}) {
    std::vector<double> a = combine(members, mode), b = combine(reversed, mode);
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == Catch::Approx(b[i]).margin(1e-12));
    }
  }
}

TEST_CASE("finalize_prediction picks the max-count class for any tau") {
  std::vector<int64_t> counts{7, 12, 3};
  for (double tau : {0.25, 1.0, 4.0, 16.0}) {
    PredictionRecord r = finalize_prediction(counts, 8, 4, tau);
    CHECK(r.predicted == 1);
    CHECK(r.confidence == r.probs[1]);
    double sum = 0.0;
    for (double p : r.probs) sum += p;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
  // higher temperature flattens confidence
  double c1 = finalize_prediction(counts, 8, 4, 1.0).confidence;
  double c4 = finalize_prediction(counts, 8, 4, 4.0).confidence;
  CHECK(c4 < c1);
}

TEST_CASE("mc_inference is deterministic and bookkeeps consistently") {
  NetworkModel m = tiny_model();
  std::vector<double> x{0.7, 0.2};
  std::vector<std::vector<int64_t>> cum, members;
  PredictionRecord r1 = mc_inference(m, x, 5, 8, 123, RngScheme::LfsrMaxReuse,
                                     1.0, &cum, &members);
  PredictionRecord r2 = mc_inference(m, x, 5, 8, 123, RngScheme::LfsrMaxReuse);
  CHECK(r1.counts == r2.counts);
  CHECK(r1.predicted == r2.predicted);

  // cumulative counts are monotone in t and end at the member totals
  REQUIRE(cum.size() == 8);
  for (size_t t = 1; t < cum.size(); ++t) {
    for (size_t c = 0; c < cum[t].size(); ++c) {
      CHECK(cum[t][c] >= cum[t - 1][c]);
    }
  }
  std::vector<int64_t> member_sum(m.class_count, 0);
  REQUIRE(members.size() == 5);
  for (const auto& mc : members) {
    for (int c = 0; c < m.class_count; ++c) member_sum[c] += mc[c];
  }
  CHECK(member_sum == r1.counts);
  CHECK(cum.back() == r1.counts);

  // members differ (weights are actually resampled per member)
  bool any_diff = false;
  for (size_t i = 1; i < members.size(); ++i) {
    if (members[i] != members[0]) any_diff = true;
  }
  CHECK(any_diff);

  // a different master seed changes something
  PredictionRecord r3 = mc_inference(m, x, 5, 8, 124, RngScheme::LfsrMaxReuse);
  CHECK(r3.counts != r1.counts);
}

TEST_CASE("evaluate is invariant to the worker count") {
  NetworkModel m = tiny_model();
  Dataset d = tiny_data(12);
  std::string fp1, fp4;
  setenv("BSNN_THREADS", "1", 1);
  fp1 = preds_fingerprint(evaluate(m, d, 4, 8, RngScheme::LfsrMaxReuse, 9));
  setenv("BSNN_THREADS", "4", 1);
  fp4 = preds_fingerprint(evaluate(m, d, 4, 8, RngScheme::LfsrMaxReuse, 9));
  unsetenv("BSNN_THREADS");
  CHECK(fp1 == fp4);
}

TEST_CASE("sweep rows agree with per-T evaluation") {
  NetworkModel m = tiny_model();
  Dataset d = tiny_data(10);
  auto rows = sweep(m, d, 6, 3, RngScheme::Fxp8Randint, 77);
  REQUIRE(rows.size() == 6);
  for (int t = 0; t < 6; ++t) CHECK(rows[t].t == t + 1);
  // the sweep's final row must match a fresh evaluation at T = 6
  auto preds = evaluate(m, d, 3, 6, RngScheme::Fxp8Randint, 77);
  CHECK(rows[5].accuracy == Catch::Approx(accuracy(preds, d.labels)).margin(1e-12));
  CHECK(rows[5].ece == Catch::Approx(ece(preds, d.labels).ece).margin(1e-12));
  // cumulative spikes never decrease
  for (int t = 1; t < 6; ++t) CHECK(rows[t].mean_spikes >= rows[t - 1].mean_spikes);

  std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("t,accuracy,ece,mean_spikes\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, [&](size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10,
                               [](size_t i) {
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
