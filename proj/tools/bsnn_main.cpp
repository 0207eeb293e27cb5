// bsnn command line: toy training, ANN->SNN conversion, Monte-Carlo
// inference, timestep sweeps, RNG scheme comparison, and cycle reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bsnn/bsnn.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

bsnn::Dataset load_data(const std::string& images, const std::string& labels) {
  return bsnn::load_dataset(images, labels);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << text;
}

json prediction_to_json(const bsnn::PredictionRecord& rec) {
  return json{{"counts", rec.counts},       {"probs", rec.probs},
              {"predicted", rec.predicted}, {"confidence", rec.confidence},
              {"t_used", rec.t_used},       {"n_mc_used", rec.n_mc_used}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian binary spiking network inference engine"};
  app.require_subcommand(1);

  // train-toy
  auto* train_cmd = app.add_subcommand("train-toy", "train a desk-scale checkpoint");
  bsnn::toy::ToyConfig cfg;
  std::string train_out = "ann.ckpt";
  train_cmd->add_option("--mode", cfg.mode, "bayesian | frequentist-ste");
  train_cmd->add_option("--dataset", cfg.dataset, "stripes8x8 | blobs8x8");
  train_cmd->add_option("--L", cfg.levels, "quantized-ReLU levels");
  train_cmd->add_option("--seed", cfg.seed, "training seed");
  train_cmd->add_option("--train-n", cfg.train_n, "training set size");
  train_cmd->add_option("--out", train_out, "checkpoint output path");

  // gen-data
  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic dataset");
  std::string gen_kind = "stripes8x8", gen_images = "images.bstd",
              gen_labels = "labels.bstd";
  int gen_n = 512;
  uint64_t gen_seed = 1;
  gen_cmd->add_option("--dataset", gen_kind, "stripes8x8 | blobs8x8");
  gen_cmd->add_option("--n", gen_n, "sample count");
  gen_cmd->add_option("--seed", gen_seed, "generation seed");
  gen_cmd->add_option("--images", gen_images, "images tensor file");
  gen_cmd->add_option("--labels", gen_labels, "labels tensor file");

  // convert
  auto* conv_cmd = app.add_subcommand("convert", "checkpoint -> 8-bit spiking model");
  std::string conv_in, conv_out = "model.bsnn";
  int conv_T = 0;
  bool conv_keep_real = false;
  conv_cmd->add_option("--in", conv_in, "ANN checkpoint")->required();
  conv_cmd->add_option("--out", conv_out, "model output path");
  conv_cmd->add_option("--T", conv_T, "default timestep count (defaults to L)");
  conv_cmd->add_flag("--real", conv_keep_real, "emit the real-valued model, skip 8-bit quantization");

  // shared inference flags
  struct InferArgs {
    std::string model, data, labels, out;
    int T = 8, tmax = 16, nmc = 10, ece_bins = 15;
    std::string rng = "lfsr-maxreuse";
    uint64_t seed = 7;
    double tau = 1.0;
    double freq = 94.0;
  } ia;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--model", ia.model, "model file")->required();
    if (needs_data) {
      cmd->add_option("--data", ia.data, "images tensor file")->required();
      cmd->add_option("--labels", ia.labels, "labels tensor file")->required();
    }
    cmd->add_option("--nmc", ia.nmc, "Monte-Carlo samples");
    cmd->add_option("--rng", ia.rng, "fp32 | fxp8 | lfsr-noreuse | lfsr-maxreuse");
    cmd->add_option("--seed", ia.seed, "inference seed");
    cmd->add_option("--tau", ia.tau, "softmax temperature (count units)");
    cmd->add_option("--out", ia.out, "output path");
  };

  auto* infer_cmd = app.add_subcommand("infer", "Monte-Carlo inference over a dataset");
  add_common(infer_cmd, true);
  infer_cmd->add_option("--T", ia.T, "timesteps");

  auto* sweep_cmd = app.add_subcommand("sweep", "per-timestep accuracy/ECE table");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--tmax", ia.tmax, "maximum timestep");
  sweep_cmd->add_option("--ece-bins", ia.ece_bins, "calibration bin count");

  auto* rngc_cmd = app.add_subcommand("rng-compare", "accuracy under all four RNG schemes");
  add_common(rngc_cmd, true);
  rngc_cmd->add_option("--T", ia.T, "timesteps");

  auto* bench_cmd = app.add_subcommand("bench", "cycle and GOPS accounting");
  add_common(bench_cmd, false);
  bench_cmd->add_option("--T", ia.T, "timesteps");
  bench_cmd->add_option("--freq", ia.freq, "assumed clock in MHz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) {
      auto res = bsnn::toy::train(cfg);
      bsnn::save_checkpoint(res.checkpoint, train_out);
      auto test_set = bsnn::toy::gen_dataset(cfg.dataset, cfg.test_n, cfg.seed + 1000);
      std::cout << "checkpoint: " << train_out
                << "\nfinal train loss: " << res.losses.back()
                << "\nANN test accuracy: " << bsnn::toy::eval_ann(res.checkpoint, test_set)
                << std::endl;
    } else if (*gen_cmd) {
      bsnn::Dataset d = bsnn::toy::gen_dataset(gen_kind, gen_n, gen_seed);
      bsnn::TensorFile imgs{bsnn::TensorDtype::U8Image,
                            {static_cast<uint32_t>(d.n), 1, 8, 8}, d.images};
      bsnn::TensorFile labs{bsnn::TensorDtype::U8Label,
                            {static_cast<uint32_t>(d.n)}, {}};
      labs.payload.assign(d.labels.begin(), d.labels.end());
      bsnn::save_tensor(imgs, gen_images);
      bsnn::save_tensor(labs, gen_labels);
      std::cout << "wrote " << gen_images << " and " << gen_labels << std::endl;
    } else if (*conv_cmd) {
      bsnn::AnnCheckpoint ckpt = bsnn::load_checkpoint(conv_in);
      bsnn::NetworkModel model = bsnn::convert_to_snn(ckpt, conv_T);
      if (!conv_keep_real) model = bsnn::quantize_model(model);
      bsnn::save_model(model, conv_out);
      std::cout << "wrote " << conv_out << " (" << (model.deploy ? "deploy" : "real")
                << ", " << model.layers.size() << " layers)" << std::endl;
    } else if (*infer_cmd) {
      bsnn::NetworkModel model = bsnn::load_model(ia.model);
      bsnn::Dataset data = load_data(ia.data, ia.labels);
      bsnn::RngScheme scheme = bsnn::rng_scheme_from_name(ia.rng);
      auto preds = bsnn::evaluate(model, data, ia.nmc, ia.T, scheme, ia.seed, ia.tau);
      json out;
      out["accuracy"] = bsnn::accuracy(preds, data.labels);
      out["ece"] = bsnn::ece(preds, data.labels, ia.ece_bins).ece;
      out["predictions"] = json::array();
      for (const auto& p : preds) out["predictions"].push_back(prediction_to_json(p));
      std::string text = out.dump(2) + "\n";
      if (ia.out.empty()) std::cout << text;
      else write_text(ia.out, text);
      std::cout << "accuracy " << out["accuracy"] << " ece " << out["ece"] << std::endl;
    } else if (*sweep_cmd) {
      bsnn::NetworkModel model = bsnn::load_model(ia.model);
      bsnn::Dataset data = load_data(ia.data, ia.labels);
      bsnn::RngScheme scheme = bsnn::rng_scheme_from_name(ia.rng);
      auto rows = bsnn::sweep(model, data, ia.tmax, ia.nmc, scheme, ia.seed,
                              ia.tau, ia.ece_bins);
      std::string csv = bsnn::sweep_csv(rows);
      if (ia.out.empty()) std::cout << csv;
      else write_text(ia.out, csv);
    } else if (*rngc_cmd) {
      bsnn::NetworkModel model = bsnn::load_model(ia.model);
      bsnn::Dataset data = load_data(ia.data, ia.labels);
      std::string csv = "scheme,accuracy,ece\n";
      for (bsnn::RngScheme scheme :
           {bsnn::RngScheme::Fp32Uniform, bsnn::RngScheme::Fxp8Randint,
            bsnn::RngScheme::LfsrNoReuse, bsnn::RngScheme::LfsrMaxReuse}) {
        auto preds = bsnn::evaluate(model, data, ia.nmc, ia.T, scheme, ia.seed, ia.tau);
        csv += std::string(bsnn::rng_scheme_name(scheme)) + "," +
               std::to_string(bsnn::accuracy(preds, data.labels)) + "," +
               std::to_string(bsnn::ece(preds, data.labels, ia.ece_bins).ece) + "\n";
      }
      if (ia.out.empty()) std::cout << csv;
      else write_text(ia.out, csv);
    } else if (*bench_cmd) {
      bsnn::NetworkModel model = bsnn::load_model(ia.model);
      bsnn::CycleReport rep = bsnn::model_report(model, ia.T, ia.nmc, ia.freq);
      json out;
      out["total_clocks"] = rep.total_clocks;
      out["mac_ops"] = rep.mac_ops;
      out["weight_sample_clocks"] = rep.weight_sample_clocks;
      out["assumed_freq_mhz"] = rep.assumed_freq_mhz;
      out["gops_estimate"] = rep.gops_estimate;
      out["per_layer"] = json::array();
      for (const auto& lc : rep.per_layer) {
        out["per_layer"].push_back(json{{"layer", lc.layer},
                                        {"compute_clocks", lc.compute_clocks},
                                        {"mac_ops", lc.mac_ops}});
      }
      std::string text = out.dump(2) + "\n";
      if (ia.out.empty()) std::cout << text;
      else write_text(ia.out, text);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
