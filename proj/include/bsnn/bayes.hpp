#ifndef BSNN_BAYES_HPP_
#define BSNN_BAYES_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bsnn/metrics.hpp"
#include "bsnn/modelio.hpp"
#include "bsnn/netcore.hpp"
#include "bsnn/prng.hpp"
#include "bsnn/sampler.hpp"

// Monte-Carlo ensembling in time: sample the network n_MC times with
// per-member seeds, accumulate output spike counts, softmax. Members and
// dataset samples are embarrassingly parallel; reductions run in fixed
// index order so results are invariant to the worker count.

namespace bsnn {

inline int worker_count() {
  if (const char* env = std::getenv("BSNN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run fn(i) for i in [0, n) across workers; any exception is rethrown.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
  int workers = std::min<int>(worker_count(), static_cast<int>(n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) break;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

enum class CombineMode { SumThenSoftmax, MeanSoftmax };

// Default is sum-then-softmax; mean-softmax kept as a diagnostic.
inline std::vector<double> combine(
    const std::vector<std::vector<int64_t>>& counts_per_member,
    CombineMode mode = CombineMode::SumThenSoftmax, double tau = 1.0) {
  if (counts_per_member.empty()) {
    throw std::invalid_argument("combine: empty member list");
  }
  size_t k = counts_per_member[0].size();
  for (const auto& c : counts_per_member) {
    if (c.size() != k) throw std::invalid_argument("combine: ragged member list");
  }
  if (mode == CombineMode::SumThenSoftmax) {
    std::vector<double> total(k, 0.0);
    for (const auto& c : counts_per_member) {
      for (size_t i = 0; i < k; ++i) total[i] += c[i];
    }
    for (double& v : total) v /= tau;
    return softmax(total);
  }
  std::vector<double> mean(k, 0.0);
  for (const auto& c : counts_per_member) {
    std::vector<double> logits(k);
    for (size_t i = 0; i < k; ++i) logits[i] = c[i] / tau;
    std::vector<double> p = softmax(logits);
    for (size_t i = 0; i < k; ++i) mean[i] += p[i];
  }
  for (double& v : mean) v /= counts_per_member.size();
  return mean;
}

inline PredictionRecord finalize_prediction(const std::vector<int64_t>& counts,
                                            int T, int n_mc, double tau) {
  PredictionRecord rec;
  rec.counts = counts;
  std::vector<double> logits(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) logits[i] = counts[i] / tau;
  rec.probs = softmax(logits);
  rec.predicted = static_cast<int>(
      std::max_element(rec.probs.begin(), rec.probs.end()) - rec.probs.begin());
  rec.confidence = rec.probs[rec.predicted];
  rec.t_used = T;
  rec.n_mc_used = n_mc;
  return rec;
}

// Weights are sampled once per MC member and held fixed for that
// member's T timesteps. `cumulative` (optional, T x classes) receives
// counts summed over members at every cumulative timestep.
inline PredictionRecord mc_inference(
    const NetworkModel& model, const std::vector<double>& input, int n_mc, int T,
    uint64_t master_seed, RngScheme scheme, double tau = 1.0,
    std::vector<std::vector<int64_t>>* cumulative = nullptr,
    std::vector<std::vector<int64_t>>* per_member = nullptr,
    SpikeTrace* trace = nullptr, OpCounter* ops = nullptr) {
  if (n_mc < 1) throw std::domain_error("mc_inference: n_MC must be >= 1");
  if (T < 1) throw std::domain_error("mc_inference: T must be >= 1");
  std::vector<int64_t> total(model.class_count, 0);
  if (cumulative) {
    cumulative->assign(T, std::vector<int64_t>(model.class_count, 0));
  }
  if (per_member) per_member->assign(n_mc, {});
  for (int m = 0; m < n_mc; ++m) {
    RngStream rng(scheme, derive_seed(master_seed, static_cast<uint64_t>(m)));
    std::vector<std::vector<int8_t>> sampled(model.layers.size());
    for (size_t li = 0; li < model.layers.size(); ++li) {
      if (model.layers[li].has_weights()) {
        sampled[li] = sample_tensor(model.layers[li].weight, rng);
      }
    }
    SpikeTrace member_trace;
    std::vector<int64_t> counts = network_forward_snn(
        model, input, T, sampled,
        [&](int t, const std::vector<int64_t>& cum) {
          if (cumulative) {
            for (int c = 0; c < model.class_count; ++c) {
              (*cumulative)[t][c] += cum[c];
            }
          }
        },
        trace ? &member_trace : nullptr, ops);
    if (trace) {
      if (trace->counts.empty()) {
        trace->counts = member_trace.counts;
      } else {
        for (size_t l = 0; l < member_trace.counts.size(); ++l) {
          for (int t = 0; t < T; ++t) {
            trace->counts[l][t] += member_trace.counts[l][t];
          }
        }
      }
    }
    if (per_member) (*per_member)[m] = counts;
    for (int c = 0; c < model.class_count; ++c) total[c] += counts[c];
  }
  return finalize_prediction(total, T, n_mc, tau);
}

struct SweepRow {
  int t = 0;
  double accuracy = 0.0;
  double ece = 0.0;
  double mean_spikes = 0.0;  // network spikes per sample, cumulative in t
};

// One pass over the dataset yields metrics for every t <= T_max because
// output counts are cumulative in t.
inline std::vector<SweepRow> sweep(const NetworkModel& model, const Dataset& data,
                                   int t_max, int n_mc, RngScheme scheme,
                                   uint64_t master_seed, double tau = 1.0,
                                   int ece_bins = 15) {
  if (data.n == 0) throw std::domain_error("sweep: empty dataset");
  if (t_max < 1) throw std::domain_error("sweep: T_max must be >= 1");
  // cumulative counts[sample][t][class], spikes[sample][t]
  std::vector<std::vector<std::vector<int64_t>>> counts(data.n);
  std::vector<std::vector<int64_t>> spikes(data.n,
                                           std::vector<int64_t>(t_max, 0));
  parallel_for(static_cast<size_t>(data.n), [&](size_t i) {
    uint64_t sample_seed = derive_seed(master_seed, 0x53414D50ull + i);
    SpikeTrace trace;
    mc_inference(model, data.image_as_real(static_cast<int>(i)), n_mc, t_max,
                 sample_seed, scheme, tau, &counts[i], nullptr, &trace);
    for (int t = 0; t < t_max; ++t) {
      int64_t step_total = 0;
      for (const auto& layer_counts : trace.counts) step_total += layer_counts[t];
      spikes[i][t] = (t > 0 ? spikes[i][t - 1] : 0) + step_total;
    }
  });
  std::vector<SweepRow> rows(t_max);
  for (int t = 0; t < t_max; ++t) {
    std::vector<PredictionRecord> preds(data.n);
    double spike_sum = 0.0;
    for (int i = 0; i < data.n; ++i) {
      preds[i] = finalize_prediction(counts[i][t], t + 1, n_mc, tau);
      spike_sum += static_cast<double>(spikes[i][t]);
    }
    rows[t].t = t + 1;
    rows[t].accuracy = accuracy(preds, data.labels);
    rows[t].ece = ece(preds, data.labels, ece_bins).ece;
    rows[t].mean_spikes = spike_sum / data.n;
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "t,accuracy,ece,mean_spikes\n";
  os.precision(9);
  for (const SweepRow& r : rows) {
    os << r.t << ',' << r.accuracy << ',' << r.ece << ',' << r.mean_spikes
       << '\n';
  }
  return os.str();
}

// Evaluate the dataset at a single T; returns per-sample predictions.
inline std::vector<PredictionRecord> evaluate(const NetworkModel& model,
                                              const Dataset& data, int n_mc,
                                              int T, RngScheme scheme,
                                              uint64_t master_seed,
                                              double tau = 1.0) {
  std::vector<PredictionRecord> preds(data.n);
  parallel_for(static_cast<size_t>(data.n), [&](size_t i) {
    uint64_t sample_seed = derive_seed(master_seed, 0x53414D50ull + i);
    preds[i] = mc_inference(model, data.image_as_real(static_cast<int>(i)),
                            n_mc, T, sample_seed, scheme, tau);
  });
  return preds;
}

}  // namespace bsnn

#endif  // BSNN_BAYES_HPP_
