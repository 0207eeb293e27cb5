// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the full pipeline (toy training -> conversion -> 8-bit
// deployment -> Monte-Carlo spiking inference) plus the bit-level and
// statistical contracts of the RNG, sampler, metrics and file formats.

#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bsnn/bsnn.hpp"

using namespace bsnn;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": "
            << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

// ---- shared toy pipeline artifacts -------------------------------------

struct SeedRun {
  uint64_t seed;
  NetworkModel bayes_model;  // 8-bit deploy
  NetworkModel freq_model;
  Dataset test;
};

std::vector<SeedRun> train_all() {
  std::vector<SeedRun> runs;
  for (uint64_t seed : {3ull, 4ull, 5ull}) {
    SeedRun run;
    run.seed = seed;
    toy::ToyConfig cfg;
    cfg.seed = seed;
    toy::TrainResult bayes = toy::train(cfg);
    cfg.mode = "frequentist-ste";
    toy::TrainResult freq = toy::train(cfg);
    run.bayes_model = quantize_model(convert_to_snn(bayes.checkpoint));
    run.freq_model = quantize_model(convert_to_snn(freq.checkpoint));
    run.test = toy::gen_dataset(cfg.dataset, cfg.test_n, seed + 1000);
    runs.push_back(std::move(run));
  }
  return runs;
}

// ---- criterion 1: conversion equivalence -------------------------------

void criterion1() {
  bool ok = true;
  std::string detail;
  for (double s : {0.5, 1.0, 2.0}) {
    for (int L : {2, 4, 8}) {
      for (int j = 0; j < 400; ++j) {
        double v = -2.0 * s + 4.0 * s * j / 399.0;
        double u = s / 2.0;
        int count = 0;
        for (int t = 0; t < L; ++t) {
          IfResult r = if_step(u, v, s);
          u = r.u;
          count += r.spike;
        }
        double rate_act = s * count / L;
        if (std::fabs(rate_act - qrelu(v, s, L)) > 1e-9) {
          ok = false;
          std::ostringstream os;
          os << "mismatch at s=" << s << " L=" << L << " v=" << v;
          detail = os.str();
        }
      }
    }
  }
  report(1, "IF rate equals quantized ReLU at T=L (constant current)", ok,
         detail);
}

// ---- criterion 2: LFSR correctness -------------------------------------

std::array<int, 32> oracle32_step(std::array<int, 32> b) {
  std::array<int, 32> n{};
  int carry = b[31];
  for (int i = 31; i >= 1; --i) n[i] = b[i - 1];
  if (carry) { n[22] ^= 1; n[2] ^= 1; n[1] ^= 1; n[0] ^= 1; }
  return n;
}

void criterion2() {
  // full 8-bit enumeration
  std::set<uint8_t> seen;
  uint8_t st8 = 1;
  do {
    seen.insert(st8);
    st8 = lfsr8_step(st8);
  } while (st8 != 1);
  bool ok8 = seen.size() == 255;

  // 32-bit vs independent bit-level oracle
  bool ok32 = true;
  uint32_t word = 0xACE1u;
  std::array<int, 32> bits{};
  for (int i = 0; i < 32; ++i) bits[i] = (word >> i) & 1;
  for (int i = 0; i < 1000 && ok32; ++i) {
    word = lfsr_step(word);
    bits = oracle32_step(bits);
    uint32_t w2 = 0;
    for (int k = 0; k < 32; ++k) w2 |= static_cast<uint32_t>(bits[k]) << k;
    ok32 = word == w2;
  }

  // byte uniformity over 10^6 bank bytes, +-5 sigma per value
  LfsrBank bank = bank_init(0xB10C5EED, 16);
  std::vector<int64_t> hist(256, 0);
  const int64_t n_bytes = 1000000;
  for (int64_t i = 0; i < n_bytes / 64; ++i) {
    for (uint8_t b : bank_draw64(bank)) hist[b]++;
  }
  double p = 1.0 / 256.0;
  double sigma = std::sqrt(n_bytes * p * (1 - p));
  bool uniform = true;
  for (int v = 0; v < 256; ++v) {
    if (std::fabs(hist[v] - n_bytes * p) > 5 * sigma) uniform = false;
  }

  std::ostringstream os;
  os << "period=" << seen.size() << " oracle=" << (ok32 ? "match" : "diverged")
     << " uniformity=" << (uniform ? "ok" : "off");
  report(2, "LFSR period, bit-level oracle, byte uniformity",
         ok8 && ok32 && uniform, os.str());
}

// ---- criterion 3: sampler statistics -----------------------------------

void criterion3() {
  bool ok = true;
  std::ostringstream os;
  const int n = 200000;
  for (uint8_t raw : {uint8_t{1}, uint8_t{64}, uint8_t{128}, uint8_t{200},
                      uint8_t{255}}) {
    RngStream rng(RngScheme::LfsrMaxReuse, 0x5EED0000ull + raw);
    int64_t plus = 0;
    for (int i = 0; i < n; ++i) {
      if (sample_weight(Q8Prob{raw}, rng.next_byte()) == 1) ++plus;
    }
    double p = raw / 256.0;
    double freq = static_cast<double>(plus) / n;
    double tol = 4.0 * std::sqrt(p * (1 - p) / n);
    if (std::fabs(freq - p) > tol) {
      ok = false;
      os << " raw=" << int(raw) << " freq=" << freq << " off";
    }
  }
  report(3, "Bernoulli sampler frequency within 4 sigma for 5 probabilities",
         ok, os.str());
}

// ---- criteria 4 & 5: RNG-scheme and calibration trends ------------------

void criteria45(const std::vector<SeedRun>& runs) {
  const int n_mc = 10, T = 8;
  double gap_sum = 0.0, fp32_sum = 0.0, fxp8_sum = 0.0, nore_sum = 0.0,
         maxr_sum = 0.0;
  double ece_bayes_sum = 0.0, ece_freq_sum = 0.0;
  for (const SeedRun& run : runs) {
    std::map<RngScheme, double> acc;
    for (RngScheme scheme :
         {RngScheme::Fp32Uniform, RngScheme::Fxp8Randint,
          RngScheme::LfsrNoReuse, RngScheme::LfsrMaxReuse}) {
      auto preds = evaluate(run.bayes_model, run.test, n_mc, T, scheme,
                            run.seed * 101 + 7);
      acc[scheme] = accuracy(preds, run.test.labels);
    }
    gap_sum += std::fabs(acc[RngScheme::LfsrNoReuse] -
                         acc[RngScheme::LfsrMaxReuse]);
    fp32_sum += acc[RngScheme::Fp32Uniform];
    fxp8_sum += acc[RngScheme::Fxp8Randint];
    nore_sum += acc[RngScheme::LfsrNoReuse];
    maxr_sum += acc[RngScheme::LfsrMaxReuse];

    auto bayes_preds = evaluate(run.bayes_model, run.test, n_mc, T,
                                RngScheme::LfsrMaxReuse, run.seed * 101 + 7);
    auto freq_preds = evaluate(run.freq_model, run.test, 1, T,
                               RngScheme::LfsrMaxReuse, run.seed * 101 + 7);
    ece_bayes_sum += ece(bayes_preds, run.test.labels).ece;
    ece_freq_sum += ece(freq_preds, run.test.labels).ece;
  }
  const double k = static_cast<double>(runs.size());
  double mean_gap = gap_sum / k;
  double fp32 = fp32_sum / k, fxp8 = fxp8_sum / k, nore = nore_sum / k,
         maxr = maxr_sum / k;
  bool gap_ok = mean_gap <= 0.02;
  bool fp32_ok = fp32 >= fxp8 - 0.01 && fp32 >= nore - 0.01 &&
                 fp32 >= maxr - 0.01;
  std::ostringstream os4;
  os4 << "mean |noreuse-maxreuse| = " << mean_gap << ", mean acc fp32=" << fp32
      << " fxp8=" << fxp8 << " noreuse=" << nore << " maxreuse=" << maxr;
  report(4, "RNG-scheme accuracy trend over 3 seeds", gap_ok && fp32_ok,
         os4.str());

  double ece_b = ece_bayes_sum / k, ece_f = ece_freq_sum / k;
  std::ostringstream os5;
  os5 << "mean ECE bayesian=" << ece_b << " frequentist=" << ece_f;
  report(5, "Bayesian ensemble better calibrated than frequentist",
         ece_b <= ece_f, os5.str());
}

// ---- criterion 6: timestep saturation ----------------------------------

void criterion6(const SeedRun& run) {
  auto rows = sweep(run.bayes_model, run.test, 16, 10,
                    RngScheme::LfsrMaxReuse, 4242);
  double acc_L = rows[7].accuracy, acc_2L = rows[15].accuracy;
  bool sat_ok = std::fabs(acc_2L - acc_L) <= 0.01;

  // cumulative output counts are monotone in t
  bool mono_ok = true;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::vector<int64_t>> cum;
    mc_inference(run.bayes_model, run.test.image_as_real(i), 10, 16, 999 + i,
                 RngScheme::LfsrMaxReuse, 1.0, &cum);
    for (size_t t = 1; t < cum.size(); ++t) {
      for (size_t c = 0; c < cum[t].size(); ++c) {
        if (cum[t][c] < cum[t - 1][c]) mono_ok = false;
      }
    }
  }
  std::ostringstream os;
  os << "acc(T=8)=" << acc_L << " acc(T=16)=" << acc_2L
     << " monotone=" << (mono_ok ? "yes" : "no");
  report(6, "accuracy saturates by T=L and counts are monotone", sat_ok && mono_ok,
         os.str());
}

// ---- criterion 7: cycle model anchors ----------------------------------

void criterion7() {
  Geometry g333{1, 64, 3, 3, 1, 0, 3, 3};  // 64 filters, one output pixel
  bool anchor_ok = conv_cycles(g333) == 3 && sampling_cycles(64) == 1;

  bool instr_ok = true;
  CounterRng rng{0xC1C1E5, 0};
  auto ri = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.next_u64() % (hi - lo + 1));
  };
  for (int trial = 0; trial < 20 && instr_ok; ++trial) {
    NetworkModel m;
    m.input_ch = ri(1, 3);
    m.input_h = ri(4, 8);
    m.input_w = ri(4, 8);
    LayerSpec enc;
    enc.kind = LayerKind::EncoderConv;
    enc.geom = Geometry{m.input_ch, ri(1, 8), ri(1, 3), ri(1, 3), ri(1, 2),
                        ri(0, 1), m.input_h, m.input_w};
    LayerSpec fc;
    fc.kind = LayerKind::BinaryFc;
    fc.geom = Geometry::fc(enc.geom.out_elems(), ri(2, 5));
    m.class_count = fc.geom.out_ch;
    for (LayerSpec* l : {&enc, &fc}) {
      l->a.assign(l->geom.out_ch, 1.0);
      l->b.assign(l->geom.out_ch, 0.0);
      l->theta = 1.0;
      l->step = 1.0;
      l->weight.prob_q.assign(l->geom.weight_count(), 128);
      m.layers.push_back(*l);
    }
    int T = ri(1, 6);
    std::vector<std::vector<int8_t>> sampled;
    for (const auto& l : m.layers) {
      sampled.emplace_back(l.geom.weight_count(), 1);
    }
    OpCounter ops;
    network_forward_snn(m, std::vector<double>(m.layers[0].geom.in_elems(), 0.4),
                        T, sampled, nullptr, &ops);
    if (ops.mac_ops != model_report(m, T, 1).mac_ops) instr_ok = false;
  }
  report(7, "cycle anchors and instrumented op count equals analytic model",
         anchor_ok && instr_ok);
}

// ---- criterion 8: determinism across worker counts ---------------------

void criterion8(const SeedRun& run) {
  auto fingerprint = [&](int workers) {
    setenv("BSNN_THREADS", std::to_string(workers).c_str(), 1);
    auto preds = evaluate(run.bayes_model, run.test, 4, 8,
                          RngScheme::LfsrMaxReuse, 31415);
    std::string fp;
    for (const auto& p : preds) {
      fp += std::to_string(p.predicted) + ":";
      for (int64_t c : p.counts) fp += std::to_string(c) + ",";
    }
    fp += "|" + sweep_csv(sweep(run.bayes_model, run.test, 8, 4,
                                RngScheme::LfsrMaxReuse, 31415));
    std::vector<uint8_t> bytes = serialize_model(run.bayes_model);
    fp += "|" + std::to_string(detail::crc32(bytes.data(), bytes.size()));
    return fp;
  };
  std::string f1 = fingerprint(1), f4 = fingerprint(4), f8 = fingerprint(8);
  unsetenv("BSNN_THREADS");
  report(8, "bit-identical predictions/CSVs/models for 1, 4, 8 workers",
         f1 == f4 && f4 == f8);
}

// ---- criterion 9: ECE anchors ------------------------------------------

PredictionRecord rec2(int predicted, double confidence) {
  PredictionRecord r;
  r.predicted = predicted;
  r.confidence = confidence;
  return r;
}

void criterion9() {
  // calibrated: 10 preds at conf 0.8, exactly 8 correct -> ece 0
  std::vector<PredictionRecord> cal(10, rec2(1, 0.8));
  std::vector<int> cal_labels(10, 1);
  cal_labels[0] = cal_labels[1] = 0;
  bool ok0 = std::fabs(ece(cal, cal_labels).ece) < 1e-12;

  // overconfident: conf 1.0, accuracy 0.5 -> ece 0.5
  std::vector<PredictionRecord> over(10, rec2(1, 1.0));
  std::vector<int> over_labels(10, 1);
  for (int i = 0; i < 5; ++i) over_labels[i] = 0;
  bool ok5 = std::fabs(ece(over, over_labels).ece - 0.5) < 1e-12;

  // two bins of two: (conf 0.6, acc 0.5) and (conf 0.9, acc 1.0) -> 0.1
  std::vector<PredictionRecord> two{rec2(1, 0.6), rec2(1, 0.6), rec2(1, 0.9),
                                    rec2(1, 0.9)};
  std::vector<int> two_labels{1, 0, 1, 1};
  bool ok1 = std::fabs(ece(two, two_labels, 4).ece - 0.1) < 1e-12;

  report(9, "ECE anchors 0 / 0.5 / 0.1 exact", ok0 && ok5 && ok1);
}

// ---- criterion 10: format robustness -----------------------------------

void criterion10(const SeedRun& run) {
  std::vector<uint8_t> good = serialize_model(run.bayes_model);
  auto code_of = [](std::vector<uint8_t> bytes) {
    try {
      deserialize_model(std::move(bytes));
      return std::string("none");
    } catch (const IoError& e) {
      switch (e.code()) {
        case IoErrorCode::BadMagic: return std::string("magic");
        case IoErrorCode::BadVersion: return std::string("version");
        case IoErrorCode::BadChecksum: return std::string("checksum");
        case IoErrorCode::Truncated: return std::string("truncated");
        default: return std::string("other");
      }
    }
  };
  std::vector<uint8_t> bm = good; bm[1] = '?';
  std::vector<uint8_t> bv = good; bv[4] ^= 0x40;
  std::vector<uint8_t> bc = good; bc[good.size() / 2] ^= 0x10;
  bool distinct = code_of(bm) == "magic" && code_of(bv) == "version" &&
                  code_of(bc) == "checksum";

  bool roundtrip = serialize_model(deserialize_model(good)) == good;

  // the committed golden model still parses and re-serializes identically
  bool golden_ok = false;
  try {
    NetworkModel g = load_model(std::string(BSNN_TEST_DATA_DIR) +
                                "/fixture_model.bsnn");
    golden_ok = !serialize_model(g).empty() && g.deploy;
  } catch (const std::exception&) {
    golden_ok = false;
  }
  report(10, "distinct corruption errors and byte-identical round trips",
         distinct && roundtrip && golden_ok);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();

  std::cout << "training toy models (3 seeds x 2 modes)..." << std::endl;
  std::vector<SeedRun> runs = train_all();

  criteria45(runs);
  criterion6(runs[0]);
  criterion7();
  criterion8(runs[0]);
  criterion9();
  criterion10(runs[0]);

  if (g_failures == 0) {
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
  }
  std::cout << g_failures << " acceptance criteria failed" << std::endl;
  return 1;
}
