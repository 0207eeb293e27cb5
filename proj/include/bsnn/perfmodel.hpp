#ifndef BSNN_PERFMODEL_HPP_
#define BSNN_PERFMODEL_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bsnn/netcore.hpp"

// Cycle accounting of the PE array and PRNG bank: 64 parallel PEs, each
// processing one 3-row column slice of a filter per clock, and a bank
// producing 64 random bytes per clock for weight sampling.

namespace bsnn {

struct LayerCycles {
  int layer = 0;
  int64_t compute_clocks = 0;
  int64_t mac_ops = 0;
};

struct CycleReport {
  int64_t total_clocks = 0;
  int64_t mac_ops = 0;  // multiply + accumulate counted as 2 ops
  int64_t weight_sample_clocks = 0;
  std::vector<LayerCycles> per_layer;
  double assumed_freq_mhz = 94.0;
  double gops_estimate = 0.0;
};

// clocks = ceil(C_out/pe_count) * H_out * W_out * C_in * K_w * ceil(K_h/rows_per_clock)
inline int64_t conv_cycles(const Geometry& g, int pe_count = 64,
                           int rows_per_clock = 3) {
  if (pe_count < 1 || rows_per_clock < 1) {
    throw std::domain_error("conv_cycles: bad PE parameters");
  }
  int64_t groups = (g.out_ch + pe_count - 1) / pe_count;
  int64_t kh_slices = (g.kh + rows_per_clock - 1) / rows_per_clock;
  return groups * g.out_h() * g.out_w() * g.in_ch * g.kw * kh_slices;
}

inline int64_t sampling_cycles(int64_t weight_count) {
  if (weight_count < 0) {
    throw std::domain_error("sampling_cycles: negative weight count");
  }
  return (weight_count + 63) / 64;
}

inline CycleReport model_report(const NetworkModel& model, int T, int n_mc,
                                double freq_mhz = 94.0, int pe_count = 64,
                                int rows_per_clock = 3) {
  CycleReport rep;
  rep.assumed_freq_mhz = freq_mhz;
  int64_t per_pass_clocks = 0;
  for (size_t li = 0; li < model.layers.size(); ++li) {
    const LayerSpec& l = model.layers[li];
    LayerCycles lc;
    lc.layer = static_cast<int>(li);
    if (l.has_weights()) {
      lc.compute_clocks = conv_cycles(l.geom, pe_count, rows_per_clock);
      lc.mac_ops = 2ll * l.geom.out_elems() * l.geom.fan_in();
    }
    rep.per_layer.push_back(lc);
    per_pass_clocks += lc.compute_clocks;
    rep.mac_ops += lc.mac_ops;
  }
  rep.mac_ops *= static_cast<int64_t>(T) * n_mc;
  rep.weight_sample_clocks =
      sampling_cycles(static_cast<int64_t>(model.total_weights())) * n_mc;
  rep.total_clocks =
      per_pass_clocks * static_cast<int64_t>(T) * n_mc + rep.weight_sample_clocks;
  if (rep.total_clocks > 0) {
    rep.gops_estimate = (static_cast<double>(rep.mac_ops) / rep.total_clocks) *
                        freq_mhz * 1e-3;
  }
  return rep;
}

}  // namespace bsnn

#endif  // BSNN_PERFMODEL_HPP_
