#ifndef BSNN_METRICS_HPP_
#define BSNN_METRICS_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bsnn/netcore.hpp"

// Accuracy, expected calibration error, spike statistics.

namespace bsnn {

struct PredictionRecord {
  std::vector<int64_t> counts;  // per class, summed over T and n_MC
  std::vector<double> probs;    // softmax output
  int predicted = 0;
  double confidence = 0.0;
  int t_used = 0;
  int n_mc_used = 0;
};

template <typename Preds>
double accuracy(const Preds& preds, const std::vector<int>& labels) {
  if (preds.empty() || preds.size() != labels.size()) {
    throw std::domain_error("accuracy: empty or mismatched inputs");
  }
  size_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / preds.size();
}

struct EceBin {
  double confidence_sum = 0.0;
  int64_t correct_count = 0;
  int64_t total = 0;
};

struct EceReport {
  std::vector<EceBin> bins;
  double ece = 0.0;
  int B = 15;
};

// Equal-width bins on (0,1]; bin b covers ((b-1)/B, b/B], confidence 0
// lands in bin 1. ece = sum_b (n_b/N) * |acc_b - conf_b|.
template <typename Preds>
EceReport ece(const Preds& preds, const std::vector<int>& labels, int B = 15) {
  if (B < 1) throw std::domain_error("ece: B must be >= 1");
  if (preds.empty() || preds.size() != labels.size()) {
    throw std::domain_error("ece: empty or mismatched inputs");
  }
  EceReport rep;
  rep.B = B;
  rep.bins.assign(B, EceBin{});
  for (size_t i = 0; i < preds.size(); ++i) {
    double conf = preds[i].confidence;
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw std::domain_error("ece: confidence outside [0,1]");
    }
    int b = static_cast<int>(std::ceil(conf * B)) - 1;
    if (b < 0) b = 0;  // conf == 0
    if (b >= B) b = B - 1;
    rep.bins[b].confidence_sum += conf;
    rep.bins[b].correct_count += preds[i].predicted == labels[i] ? 1 : 0;
    rep.bins[b].total += 1;
  }
  const double n = static_cast<double>(preds.size());
  double e = 0.0;
  for (const EceBin& bin : rep.bins) {
    if (bin.total == 0) continue;
    double acc_b = static_cast<double>(bin.correct_count) / bin.total;
    double conf_b = bin.confidence_sum / bin.total;
    e += (bin.total / n) * std::fabs(acc_b - conf_b);
  }
  rep.ece = e;
  return rep;
}

struct SpikeStats {
  int64_t total = 0;
  std::vector<std::vector<int64_t>> per_layer_per_step;
  double mean_rate = 0.0;  // spikes per neuron-timestep
};

inline SpikeStats spike_stats(const SpikeTrace& trace,
                              const std::vector<int>& neurons_per_layer) {
  SpikeStats st;
  st.per_layer_per_step = trace.counts;
  int64_t neuron_steps = 0;
  for (size_t l = 0; l < trace.counts.size(); ++l) {
    for (int64_t c : trace.counts[l]) st.total += c;
    if (l < neurons_per_layer.size()) {
      neuron_steps += static_cast<int64_t>(neurons_per_layer[l]) *
                      static_cast<int64_t>(trace.counts[l].size());
    }
  }
  st.mean_rate = neuron_steps > 0 ? static_cast<double>(st.total) / neuron_steps
                                  : 0.0;
  return st;
}

}  // namespace bsnn

#endif  // BSNN_METRICS_HPP_
