// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Command line front end. Every subcommand prints one JSON summary object to
// stdout (see docs/cli_summary.schema.json); diagnostics go to stderr.
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "uselab/curate.hpp"
#include "uselab/degrade.hpp"
#include "uselab/dp_oracle.hpp"
#include "uselab/metrics.hpp"
#include "uselab/rir.hpp"
#include "uselab/sfi_stft.hpp"
#include "uselab/simulate.hpp"
#include "uselab/two_stage.hpp"
#include "uselab/util.hpp"
#include "uselab/wav.hpp"

namespace {

using nlohmann::json;

// Keys accepted in a --config file; anything else is rejected by name.
const std::vector<std::string> kConfigKeys = {
    "seed",      "workers",   "target",     "encoding", "threshold",
    "bins",      "quantiles", "band_width", "window",   "points",
    "samples",   "model",     "out_dir",    "noise_dir", "rir_dir"};

struct GlobalOpts {
  uint64_t seed = 0;
  size_t workers = 1;
  std::string config_path;
  json config = json::object();

  void load_config() {
    if (config_path.empty()) return;
    std::ifstream f(config_path);
    if (!f) throw uselab::IoError("cannot open config: " + config_path);
    try {
      config = json::parse(f);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config parse error: " +
                                  std::string(e.what()));
    }
    if (!config.is_object()) {
      throw std::invalid_argument("config must be a JSON object");
    }
    for (const auto& [key, _] : config.items()) {
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) ==
          kConfigKeys.end()) {
        throw std::invalid_argument("config: unknown key '" + key + "'");
      }
    }
  }

  // Flag > config > default.
  template <typename T>
  T resolve(const CLI::Option* opt, T flag_value, const std::string& key,
            T def) const {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (config.contains(key)) return config[key].get<T>();
    if (opt != nullptr && opt->count() == 0 && flag_value != def) {
      return flag_value;  // caller-set default
    }
    return def;
  }
};

void print_summary(const json& j) { std::cout << j.dump(2) << "\n"; }

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw uselab::IoError("cannot open json file: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw std::invalid_argument("json parse error in " + path + ": " +
                                e.what());
  }
}

uselab::dp::DiscreteJointModel load_model(const std::string& spec,
                                          size_t grid_points) {
  if (spec == "gaussian") {
    return uselab::dp::DiscreteJointModel::gaussian_grid(grid_points);
  }
  if (spec == "binary") {
    return uselab::dp::DiscreteJointModel::binary_uninformative();
  }
  if (spec == "deterministic") {
    return uselab::dp::DiscreteJointModel::deterministic(
        {-2.0, -1.0, 0.0, 1.0, 2.0});
  }
  return uselab::dp::DiscreteJointModel::from_json(load_json_file(spec));
}

// Runs fn(i) for i in [0, n) across `workers` threads; item order in outputs
// is the caller's responsibility (results should be indexed by i).
template <typename Fn>
void parallel_for(size_t n, size_t workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// --- subcommand implementations ------------------------------------------

int cmd_simulate(const GlobalOpts& g, const std::string& manifest_path,
                 const std::string& recipes_path, const std::string& noise_dir,
                 const std::string& rir_dir, const std::string& out_dir,
                 const std::string& target, const std::string& encoding) {
  const auto entries = uselab::curate::read_manifest(manifest_path);
  const json recipes_j = load_json_file(recipes_path);

  std::vector<uselab::degrade::SimulateItem> items;
  for (const auto& e : entries) {
    uselab::degrade::SimulateItem item;
    item.entry = e;
    if (recipes_j.contains("steps")) {
      item.recipe = uselab::degrade::Recipe::from_json(recipes_j);
    } else if (recipes_j.contains(e.id)) {
      item.recipe = uselab::degrade::Recipe::from_json(recipes_j[e.id]);
    } else if (recipes_j.contains("default")) {
      item.recipe = uselab::degrade::Recipe::from_json(recipes_j["default"]);
    } else {
      throw std::invalid_argument("no recipe for item '" + e.id + "'");
    }
    items.push_back(std::move(item));
  }

  uselab::degrade::AssetBank bank;
  if (!noise_dir.empty()) bank.noises = uselab::degrade::load_wav_dir(noise_dir);
  if (!rir_dir.empty()) bank.rirs = uselab::degrade::load_wav_dir(rir_dir);

  uselab::degrade::SimulateOptions opts;
  opts.out_dir = out_dir;
  opts.root_seed = g.seed;
  opts.workers = g.workers;
  opts.target = uselab::rir::TargetSpec::parse(target);
  opts.encoding = uselab::wav_encoding_from_string(encoding);

  json summary = uselab::degrade::simulate(items, bank, opts);
  summary["command"] = "simulate";
  summary["ok"] = true;
  print_summary(summary);
  return 0;
}

int cmd_rir_decompose(const std::string& rir_path, double window_ms) {
  const auto rir = uselab::read_wav(rir_path);
  const auto dec = uselab::rir::decompose(rir, window_ms);
  const auto rebuilt = dec.reconstruct();
  double err = 0.0;
  for (size_t i = 0; i < rebuilt.size(); ++i) {
    err = std::max(err, std::abs(rebuilt[i] - rir.samples[i]));
  }
  json summary = dec.to_json();
  summary["command"] = "rir_decompose";
  summary["ok"] = true;
  summary["reconstruction_error"] = err;
  print_summary(summary);
  return 0;
}

int cmd_rir_targets(const std::string& speech_path, const std::string& rir_path,
                    const std::string& target, double window_ms,
                    const std::string& out_path) {
  const auto speech = uselab::read_wav(speech_path);
  const auto rir = uselab::read_wav(rir_path);
  const auto dec = uselab::rir::decompose(rir, window_ms);
  const auto spec = uselab::rir::TargetSpec::parse(target);
  const auto tgt = uselab::rir::make_target(speech, dec, spec);
  uselab::write_wav(tgt, out_path);
  print_summary(json{{"command", "rir_targets"},
                     {"ok", true},
                     {"target", spec.to_string()},
                     {"out", out_path},
                     {"direct_index", dec.direct_index},
                     {"n_samples", tgt.size()},
                     {"digest", uselab::digest_doubles(tgt.samples)}});
  return 0;
}

int cmd_stft(const std::string& in_path, const std::string& out_path) {
  const auto audio = uselab::read_wav(in_path);
  const auto grid = uselab::sfi::stft(audio);
  uselab::sfi::save_grid(grid, out_path);
  print_summary(json{{"command", "stft"},
                     {"ok", true},
                     {"in", in_path},
                     {"out", out_path},
                     {"sample_rate", grid.params.sample_rate},
                     {"win_len", grid.params.win_len},
                     {"hop_len", grid.params.hop_len},
                     {"n_bins", grid.params.n_bins},
                     {"n_frames", grid.n_frames}});
  return 0;
}

int cmd_istft(const std::string& in_path, const std::string& out_path,
              const std::string& encoding) {
  const auto grid = uselab::sfi::load_grid(in_path);
  const auto audio = uselab::sfi::istft(grid);
  uselab::write_wav(audio, out_path,
                    uselab::wav_encoding_from_string(encoding));
  print_summary(json{{"command", "istft"},
                     {"ok", true},
                     {"in", in_path},
                     {"out", out_path},
                     {"sample_rate", audio.sample_rate},
                     {"n_samples", audio.size()}});
  return 0;
}

int cmd_bands(int fs, double width) {
  const auto part = uselab::sfi::band_partition(fs, width);
  json bands = json::array();
  for (const auto& b : part.bands) {
    bands.push_back({{"lo_bin", b.lo_bin},
                     {"hi_bin", b.hi_bin},
                     {"lo_hz", b.lo_hz},
                     {"hi_hz", b.hi_hz}});
  }
  print_summary(json{{"command", "bands"},
                     {"ok", true},
                     {"sample_rate", fs},
                     {"band_width_hz", width},
                     {"n_bands", part.bands.size()},
                     {"bands", bands}});
  return 0;
}

int cmd_curate_score(const GlobalOpts& g, const std::string& manifest_path,
                     const std::string& out_path) {
  const auto entries = uselab::curate::read_manifest(manifest_path);
  std::vector<std::pair<std::string, double>> scores(entries.size());
  parallel_for(entries.size(), g.workers, [&](size_t i) {
    const auto audio = uselab::read_wav(entries[i].path);
    scores[i] = {entries[i].id, uselab::curate::proxy_quality_score(audio)};
  });
  uselab::curate::write_scores(scores, out_path);
  print_summary(json{{"command", "curate_score"},
                     {"ok", true},
                     {"n_items", entries.size()},
                     {"out", out_path}});
  return 0;
}

int cmd_curate_filter(const std::string& manifest_path,
                      const std::string& scores_path, double threshold,
                      const std::string& kept_out) {
  const auto entries = uselab::curate::read_manifest(manifest_path);
  const auto score_map = uselab::curate::read_scores(scores_path);
  std::vector<double> scores;
  scores.reserve(entries.size());
  for (const auto& e : entries) {
    const auto it = score_map.find(e.id);
    if (it == score_map.end()) {
      throw std::invalid_argument("no score for item '" + e.id + "'");
    }
    scores.push_back(it->second);
  }
  const auto report =
      uselab::curate::filter_by_threshold(entries, scores, threshold);
  if (!kept_out.empty()) {
    std::vector<uselab::curate::ManifestEntry> kept;
    for (const auto& e : entries) {
      if (std::find(report.kept_ids.begin(), report.kept_ids.end(), e.id) !=
          report.kept_ids.end()) {
        kept.push_back(e);
      }
    }
    uselab::curate::write_manifest(kept, kept_out);
  }
  json summary = report.to_json();
  summary["command"] = "curate_filter";
  summary["ok"] = true;
  if (!kept_out.empty()) summary["kept_manifest"] = kept_out;
  print_summary(summary);
  return 0;
}

int cmd_curate_hist(const std::string& scores_path, size_t bins) {
  const auto score_map = uselab::curate::read_scores(scores_path);
  std::vector<double> scores;
  scores.reserve(score_map.size());
  for (const auto& [_, s] : score_map) scores.push_back(s);
  const auto hist = uselab::curate::quality_histogram(scores, bins);
  print_summary(json{{"command", "curate_hist"},
                     {"ok", true},
                     {"n_scores", scores.size()},
                     {"edges", hist.edges},
                     {"counts", hist.counts},
                     {"median", uselab::curate::median(scores)}});
  return 0;
}

int cmd_dp_identity(const std::string& model_spec, size_t grid_points) {
  const auto model = load_model(model_spec, grid_points);
  const auto rep = uselab::dp::verify_d0_identity(model);
  json summary = rep.to_json();
  summary["command"] = "dp_identity";
  summary["ok"] = true;
  summary["model"] = model_spec;
  print_summary(summary);
  return 0;
}

int cmd_dp_curve(const std::string& model_spec, size_t grid_points,
                 size_t points) {
  if (points < 2) throw std::invalid_argument("curve needs >= 2 points");
  const auto model = load_model(model_spec, grid_points);
  std::vector<double> ts(points);
  for (size_t i = 0; i < points; ++i) {
    ts[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  const auto curve = uselab::dp::dp_curve(model, ts);
  json pts = json::array();
  for (const auto& p : curve) {
    pts.push_back({{"t", p.t},
                   {"distortion", p.distortion},
                   {"perception", p.perception}});
  }
  print_summary(json{{"command", "dp_curve"},
                     {"ok", true},
                     {"model", model_spec},
                     {"points", pts}});
  return 0;
}

int cmd_dp_sample_mse(const GlobalOpts& g, const std::string& model_spec,
                      size_t grid_points, size_t samples) {
  const auto model = load_model(model_spec, grid_points);
  uselab::RandomStream stream(g.seed, "posterior-sampling");
  const double mse =
      uselab::dp::posterior_sampling_mse(model, samples, stream);
  const double mmse = uselab::dp::mmse_distortion(model);
  print_summary(json{{"command", "dp_sample_mse"},
                     {"ok", true},
                     {"model", model_spec},
                     {"n_samples", samples},
                     {"mse", mse},
                     {"mmse", mmse},
                     {"ratio", mmse > 0.0 ? mse / mmse : 0.0}});
  return 0;
}

int cmd_twostage_fit(const std::vector<std::string>& grid_paths,
                     const std::string& out_path, size_t quantiles) {
  std::vector<uselab::sfi::FrameGrid> grids;
  grids.reserve(grid_paths.size());
  for (const auto& p : grid_paths) grids.push_back(uselab::sfi::load_grid(p));
  std::vector<const uselab::sfi::FrameGrid*> refs;
  refs.reserve(grids.size());
  for (const auto& gr : grids) refs.push_back(&gr);
  const auto corr = uselab::twostage::fit_corrector(refs, quantiles);
  corr.save(out_path);
  print_summary(json{{"command", "twostage_fit"},
                     {"ok", true},
                     {"out", out_path},
                     {"n_quantiles", corr.n_quantiles},
                     {"n_bins", corr.params.n_bins},
                     {"n_reference_grids", grids.size()}});
  return 0;
}

int cmd_twostage_regress(const std::string& in_path,
                         const std::string& psd_spec,
                         const std::string& out_path) {
  const auto grid = uselab::sfi::load_grid(in_path);
  std::vector<double> psd;
  // psd is either a JSON file with an array or a constant for all bins
  try {
    psd.assign(grid.params.n_bins, std::stod(psd_spec));
  } catch (const std::exception&) {
    const json j = load_json_file(psd_spec);
    if (!j.is_array()) {
      throw std::invalid_argument("psd file must hold a JSON array");
    }
    psd = j.get<std::vector<double>>();
  }
  const auto out = uselab::twostage::oracle_regression(grid, psd);
  uselab::sfi::save_grid(out, out_path);
  print_summary(json{{"command", "twostage_regress"},
                     {"ok", true},
                     {"in", in_path},
                     {"out", out_path},
                     {"n_frames", out.n_frames}});
  return 0;
}

int cmd_twostage_correct(const std::string& in_path,
                         const std::string& corr_path,
                         const std::string& final_path,
                         const std::string& correction_path) {
  const auto grid = uselab::sfi::load_grid(in_path);
  const auto corr = uselab::twostage::TransportCorrector::load(corr_path);
  const auto res = uselab::twostage::transport_correct(grid, corr);
  uselab::sfi::save_grid(res.final, final_path);
  if (!correction_path.empty()) {
    uselab::sfi::save_grid(res.correction, correction_path);
  }
  const bool identity = uselab::twostage::residual_identity_holds(
      res.final, res.correction, grid);
  print_summary(json{{"command", "twostage_correct"},
                     {"ok", true},
                     {"in", in_path},
                     {"corrector", corr_path},
                     {"final", final_path},
                     {"correction", correction_path},
                     {"residual_identity", identity}});
  return 0;
}

int cmd_twostage_residual_corr(const std::string& clean_path,
                               const std::string& regressed_path,
                               const std::string& final_path) {
  const auto clean = uselab::sfi::load_grid(clean_path);
  const auto regressed = uselab::sfi::load_grid(regressed_path);
  const auto final_grid = uselab::sfi::load_grid(final_path);
  const double r =
      uselab::twostage::residual_correlation(clean, regressed, final_grid);
  print_summary(json{{"command", "twostage_residual_corr"},
                     {"ok", true},
                     {"correlation", r}});
  return 0;
}

int cmd_twostage_lipschitz(const GlobalOpts& g, const std::string& stack_path,
                           bool normalize, size_t iters) {
  const json spec = load_json_file(stack_path);
  if (!spec.contains("layers") || !spec["layers"].is_array() ||
      spec["layers"].empty()) {
    throw std::invalid_argument("stack file needs a non-empty layers array");
  }
  uselab::twostage::LayerStack stack;
  size_t idx = 0;
  for (const auto& lj : spec["layers"]) {
    uselab::twostage::Layer layer;
    const size_t rows = lj.at("rows").get<size_t>();
    const size_t cols = lj.at("cols").get<size_t>();
    const std::string init = lj.value("init", "random");
    if (init == "identity") {
      if (rows != cols) {
        throw std::invalid_argument("identity init needs square layer");
      }
      layer.weight = uselab::twostage::Matrix::identity(rows);
    } else if (init == "random") {
      layer.weight = uselab::twostage::Matrix::zeros(rows, cols);
      uselab::RandomStream stream(g.seed, "layer-" + std::to_string(idx));
      const double scale = lj.value("scale", 1.0);
      for (double& w : layer.weight.a) w = scale * stream.gaussian();
    } else {
      throw std::invalid_argument("unknown layer init '" + init + "'");
    }
    const std::string act = lj.value("act", "leaky");
    if (act == "leaky") {
      layer.act = uselab::twostage::Activation::kLeakyRelu;
      layer.leaky_slope = lj.value("slope", 0.2);
    } else if (act == "identity") {
      layer.act = uselab::twostage::Activation::kIdentity;
    } else {
      throw std::invalid_argument("unknown activation '" + act + "'");
    }
    stack.layers.push_back(std::move(layer));
    ++idx;
  }

  if (normalize) {
    stack = uselab::twostage::spectral_normalize(stack, iters);
  } else {
    for (auto& layer : stack.layers) {
      layer.norm_estimate =
          uselab::twostage::spectral_norm_estimate(layer.weight, iters);
    }
  }

  uselab::RandomStream probe(g.seed, "lipschitz-probe");
  std::vector<double> a(stack.input_width()), b(stack.input_width());
  for (double& v : a) v = probe.gaussian();
  for (double& v : b) v = probe.gaussian();
  const auto rep = uselab::twostage::lipschitz_check(stack, a, b);
  json summary = rep.to_json();
  summary["command"] = "twostage_lipschitz";
  summary["ok"] = true;
  summary["n_layers"] = stack.layers.size();
  summary["normalized"] = normalize;
  print_summary(summary);
  return 0;
}

int cmd_metrics(const std::string& ref_path, const std::string& est_path) {
  const auto ref = uselab::read_wav(ref_path);
  const auto est = uselab::read_wav(est_path);
  json summary = uselab::metrics::evaluate(ref, est);
  summary["command"] = "metrics";
  summary["ok"] = true;
  print_summary(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech degradation, analysis and curation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "root random seed");
  auto* workers_opt =
      app.add_option("--workers", g.workers, "worker thread count")
          ->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON config file");

  // simulate
  auto* sim = app.add_subcommand("simulate", "degrade a manifest of clean audio");
  std::string sim_manifest, sim_recipes, sim_noise_dir, sim_rir_dir,
      sim_out, sim_target = "shifted_anechoic", sim_encoding = "float32";
  sim->add_option("--manifest", sim_manifest)->required();
  sim->add_option("--recipes", sim_recipes)->required();
  sim->add_option("--noise-dir", sim_noise_dir);
  sim->add_option("--rir-dir", sim_rir_dir);
  sim->add_option("--out", sim_out)->required();
  sim->add_option("--target", sim_target);
  sim->add_option("--encoding", sim_encoding);

  // rir
  auto* rir_cmd = app.add_subcommand("rir", "impulse response tools");
  rir_cmd->require_subcommand(1);
  auto* rir_dec = rir_cmd->add_subcommand("decompose", "split at direct path");
  std::string rd_rir;
  double rd_window = 50.0;
  rir_dec->add_option("--rir", rd_rir)->required();
  rir_dec->add_option("--window", rd_window, "early window in ms");
  auto* rir_tgt = rir_cmd->add_subcommand("targets", "build training target");
  std::string rt_speech, rt_rir, rt_target = "shifted_anechoic", rt_out;
  double rt_window = 50.0;
  rir_tgt->add_option("--speech", rt_speech)->required();
  rir_tgt->add_option("--rir", rt_rir)->required();
  rir_tgt->add_option("--target", rt_target);
  rir_tgt->add_option("--window", rt_window);
  rir_tgt->add_option("--out", rt_out)->required();

  // stft / istft / bands
  auto* stft_cmd = app.add_subcommand("stft", "wav -> spectrogram grid");
  std::string st_in, st_out;
  stft_cmd->add_option("--in", st_in)->required();
  stft_cmd->add_option("--out", st_out)->required();
  auto* istft_cmd = app.add_subcommand("istft", "spectrogram grid -> wav");
  std::string ist_in, ist_out, ist_encoding = "float32";
  istft_cmd->add_option("--in", ist_in)->required();
  istft_cmd->add_option("--out", ist_out)->required();
  istft_cmd->add_option("--encoding", ist_encoding);
  auto* bands_cmd = app.add_subcommand("bands", "sub-band partition");
  int bd_fs = 0;
  double bd_width = 4000.0;
  bands_cmd->add_option("--fs", bd_fs)->required();
  auto* bd_width_opt = bands_cmd->add_option("--width", bd_width);

  // curate
  auto* cur = app.add_subcommand("curate", "data curation tools");
  cur->require_subcommand(1);
  auto* cur_score = cur->add_subcommand("score", "proxy quality scores");
  std::string cs_manifest, cs_out;
  cur_score->add_option("--manifest", cs_manifest)->required();
  cur_score->add_option("--out", cs_out)->required();
  auto* cur_filter = cur->add_subcommand("filter", "threshold filtering");
  std::string cf_manifest, cf_scores, cf_kept;
  double cf_threshold = 0.5;
  cur_filter->add_option("--manifest", cf_manifest)->required();
  cur_filter->add_option("--scores", cf_scores)->required();
  auto* cf_thr_opt = cur_filter->add_option("--threshold", cf_threshold);
  cur_filter->add_option("--kept-out", cf_kept);
  auto* cur_hist = cur->add_subcommand("hist", "score histogram");
  std::string ch_scores;
  size_t ch_bins = 20;
  cur_hist->add_option("--scores", ch_scores)->required();
  auto* ch_bins_opt = cur_hist->add_option("--bins", ch_bins);

  // dp
  auto* dp_cmd = app.add_subcommand("dp", "distortion-perception oracle");
  dp_cmd->require_subcommand(1);
  std::string dpi_model = "gaussian", dpc_model = "gaussian",
              dps_model = "gaussian";
  size_t dp_grid = 201, dpc_points = 11, dps_samples = 200000;
  auto* dp_id = dp_cmd->add_subcommand("identity", "perfect-perception cost");
  dp_id->add_option("--model", dpi_model);
  dp_id->add_option("--grid-points", dp_grid);
  auto* dp_cv = dp_cmd->add_subcommand("curve", "tradeoff curve");
  dp_cv->add_option("--model", dpc_model);
  auto* dpc_points_opt = dp_cv->add_option("--points", dpc_points);
  dp_cv->add_option("--grid-points", dp_grid);
  auto* dp_sm = dp_cmd->add_subcommand("sample-mse", "posterior sampling MSE");
  dp_sm->add_option("--model", dps_model);
  auto* dps_samples_opt = dp_sm->add_option("--samples", dps_samples);
  dp_sm->add_option("--grid-points", dp_grid);

  // twostage
  auto* ts = app.add_subcommand("twostage", "regression + transport corrector");
  ts->require_subcommand(1);
  auto* ts_fit = ts->add_subcommand("fit", "fit corrector from clean grids");
  std::vector<std::string> tf_grids;
  std::string tf_out;
  size_t tf_quant = 256;
  ts_fit->add_option("--grids", tf_grids)->required()->expected(-1);
  ts_fit->add_option("--out", tf_out)->required();
  auto* tf_quant_opt = ts_fit->add_option("--quantiles", tf_quant);
  auto* ts_reg = ts->add_subcommand("regress", "per-bin magnitude regression");
  std::string tr_in, tr_psd, tr_out;
  ts_reg->add_option("--in", tr_in)->required();
  ts_reg->add_option("--psd", tr_psd, "JSON array file or constant")
      ->required();
  ts_reg->add_option("--out", tr_out)->required();
  auto* ts_cor = ts->add_subcommand("correct", "distribution restoration");
  std::string tc_in, tc_corr, tc_final, tc_correction;
  ts_cor->add_option("--in", tc_in)->required();
  ts_cor->add_option("--corrector", tc_corr)->required();
  ts_cor->add_option("--final", tc_final)->required();
  ts_cor->add_option("--correction", tc_correction);
  auto* ts_rc = ts->add_subcommand("residual-corr", "stage coupling measure");
  std::string rc_clean, rc_regressed, rc_final;
  ts_rc->add_option("--clean", rc_clean)->required();
  ts_rc->add_option("--regressed", rc_regressed)->required();
  ts_rc->add_option("--final", rc_final)->required();
  auto* ts_lip = ts->add_subcommand("lipschitz", "feature distance bound");
  std::string tl_stack;
  bool tl_no_normalize = false;
  size_t tl_iters = 500;
  ts_lip->add_option("--stack", tl_stack)->required();
  ts_lip->add_flag("--no-normalize", tl_no_normalize);
  ts_lip->add_option("--iters", tl_iters);

  // metrics
  auto* met = app.add_subcommand("metrics", "reference-based quality metrics");
  std::string me_ref, me_est;
  met->add_option("--reference", me_ref)->required();
  met->add_option("--estimate", me_est)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    g.load_config();
    if (g.config.contains("seed") && app.count("--seed") == 0) {
      g.seed = g.config["seed"].get<uint64_t>();
    }
    if (g.config.contains("workers") && workers_opt->count() == 0) {
      g.workers = g.config["workers"].get<size_t>();
    }
    if (g.workers == 0) {
      throw std::invalid_argument("workers must be >= 1");
    }

    if (sim->parsed()) {
      if (g.config.contains("target") && sim->count("--target") == 0) {
        sim_target = g.config["target"].get<std::string>();
      }
      if (g.config.contains("encoding") && sim->count("--encoding") == 0) {
        sim_encoding = g.config["encoding"].get<std::string>();
      }
      return cmd_simulate(g, sim_manifest, sim_recipes, sim_noise_dir,
                          sim_rir_dir, sim_out, sim_target, sim_encoding);
    }
    if (rir_dec->parsed()) return cmd_rir_decompose(rd_rir, rd_window);
    if (rir_tgt->parsed()) {
      return cmd_rir_targets(rt_speech, rt_rir, rt_target, rt_window, rt_out);
    }
    if (stft_cmd->parsed()) return cmd_stft(st_in, st_out);
    if (istft_cmd->parsed()) return cmd_istft(ist_in, ist_out, ist_encoding);
    if (bands_cmd->parsed()) {
      if (g.config.contains("band_width") && bd_width_opt->count() == 0) {
        bd_width = g.config["band_width"].get<double>();
      }
      return cmd_bands(bd_fs, bd_width);
    }
    if (cur_score->parsed()) return cmd_curate_score(g, cs_manifest, cs_out);
    if (cur_filter->parsed()) {
      if (g.config.contains("threshold") && cf_thr_opt->count() == 0) {
        cf_threshold = g.config["threshold"].get<double>();
      }
      return cmd_curate_filter(cf_manifest, cf_scores, cf_threshold, cf_kept);
    }
    if (cur_hist->parsed()) {
      if (g.config.contains("bins") && ch_bins_opt->count() == 0) {
        ch_bins = g.config["bins"].get<size_t>();
      }
      return cmd_curate_hist(ch_scores, ch_bins);
    }
    if (dp_id->parsed()) return cmd_dp_identity(dpi_model, dp_grid);
    if (dp_cv->parsed()) {
      if (g.config.contains("points") && dpc_points_opt->count() == 0) {
        dpc_points = g.config["points"].get<size_t>();
      }
      return cmd_dp_curve(dpc_model, dp_grid, dpc_points);
    }
    if (dp_sm->parsed()) {
      if (g.config.contains("samples") && dps_samples_opt->count() == 0) {
        dps_samples = g.config["samples"].get<size_t>();
      }
      return cmd_dp_sample_mse(g, dps_model, dp_grid, dps_samples);
    }
    if (ts_fit->parsed()) {
      if (g.config.contains("quantiles") && tf_quant_opt->count() == 0) {
        tf_quant = g.config["quantiles"].get<size_t>();
      }
      return cmd_twostage_fit(tf_grids, tf_out, tf_quant);
    }
    if (ts_reg->parsed()) return cmd_twostage_regress(tr_in, tr_psd, tr_out);
    if (ts_cor->parsed()) {
      return cmd_twostage_correct(tc_in, tc_corr, tc_final, tc_correction);
    }
    if (ts_rc->parsed()) {
      return cmd_twostage_residual_corr(rc_clean, rc_regressed, rc_final);
    }
    if (ts_lip->parsed()) {
      return cmd_twostage_lipschitz(g, tl_stack, !tl_no_normalize, tl_iters);
    }
    if (met->parsed()) return cmd_metrics(me_ref, me_est);

    std::cerr << app.help() << "\n";
    return 1;
  } catch (const uselab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
