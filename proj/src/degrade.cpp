// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/degrade.hpp"

#include <algorithm>
#include <cmath>

#include "uselab/dsp.hpp"
#include "uselab/util.hpp"

namespace uselab::degrade {

namespace {

constexpr double kMu = 255.0;

double energy_of(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

}  // namespace

AudioBuffer add_noise(const AudioBuffer& speech, const AudioBuffer& noise,
                      double snr_db, RandomStream* stream,
                      nlohmann::json* info) {
  speech.validate("add_noise speech");
  noise.validate("add_noise noise");
  if (!std::isfinite(snr_db)) {
    throw std::invalid_argument("add_noise: snr must be finite");
  }
  if (speech.sample_rate != noise.sample_rate) {
    throw std::invalid_argument("add_noise: sample rate mismatch");
  }
  if (noise.empty()) throw std::invalid_argument("add_noise: empty noise");

  const size_t n = speech.size();
  size_t offset = 0;
  if (stream != nullptr) {
    offset = static_cast<size_t>(stream->next_u64() % noise.size());
  }
  std::vector<double> tiled(n);
  for (size_t i = 0; i < n; ++i) {
    tiled[i] = noise.samples[(offset + i) % noise.size()];
  }

  const double es = energy_of(speech.samples);
  const double en = energy_of(tiled);
  if (en == 0.0) {
    throw std::invalid_argument("add_noise: noise segment is silent");
  }
  const double alpha =
      es > 0.0 ? std::sqrt(es / (en * std::pow(10.0, snr_db / 10.0))) : 0.0;

  AudioBuffer out = speech;
  for (size_t i = 0; i < n; ++i) out.samples[i] += alpha * tiled[i];

  if (info != nullptr) {
    nlohmann::json j{{"snr_db", snr_db}, {"offset", offset}, {"scale", alpha}};
    if (es > 0.0 && alpha > 0.0) {
      j["achieved_snr_db"] = 10.0 * std::log10(es / (alpha * alpha * en));
    } else {
      j["achieved_snr_db"] = nullptr;
    }
    *info = std::move(j);
  }
  return out;
}

AudioBuffer clip(const AudioBuffer& speech, double threshold_ratio) {
  speech.validate("clip");
  if (!(threshold_ratio > 0.0 && threshold_ratio <= 1.0)) {
    throw std::invalid_argument("clip: threshold ratio must be in (0, 1]");
  }
  const double thr = threshold_ratio * speech.peak_abs();
  AudioBuffer out = speech;
  for (double& v : out.samples) v = std::clamp(v, -thr, thr);
  return out;
}

AudioBuffer bandlimit(const AudioBuffer& speech, double cutoff_hz) {
  speech.validate("bandlimit");
  const double nyq = speech.sample_rate / 2.0;
  if (cutoff_hz <= 0.0) {
    throw std::invalid_argument("bandlimit: cutoff must be positive");
  }
  if (cutoff_hz >= 0.99 * nyq) return speech;
  if (speech.empty()) return speech;

  const auto h = design_lowpass(cutoff_hz, speech.sample_rate, 8.0);
  const size_t delay = h.size() / 2;
  auto full = convolve(speech.samples, h, ConvolveMode::kFull);
  AudioBuffer out;
  out.sample_rate = speech.sample_rate;
  out.samples.assign(full.begin() + static_cast<long>(delay),
                     full.begin() + static_cast<long>(delay + speech.size()));
  return out;
}

AudioBuffer codec_crush(const AudioBuffer& speech, int bits, bool mulaw) {
  speech.validate("codec_crush");
  if (bits < 2 || bits > 16) {
    throw std::invalid_argument("codec_crush: bits must be in [2, 16]");
  }
  const double scale = std::pow(2.0, bits - 1);
  const double lo = -scale, hi = scale - 1.0;
  const double log1p_mu = std::log1p(kMu);

  AudioBuffer out = speech;
  for (double& v : out.samples) {
    double x = std::clamp(v, -1.0, 1.0);
    if (mulaw) {
      const double c = std::copysign(std::log1p(kMu * std::abs(x)) / log1p_mu, x);
      const double qc = std::clamp(std::round(c * scale), lo, hi) / scale;
      x = std::copysign(std::expm1(std::abs(qc) * log1p_mu) / kMu, qc);
    } else {
      x = std::clamp(std::round(x * scale), lo, hi) / scale;
    }
    v = x;
  }
  return out;
}

LossModel LossModel::bernoulli(double p_loss) {
  if (!(p_loss >= 0.0 && p_loss <= 1.0)) {
    throw std::invalid_argument("packet_loss: p_loss must be in [0, 1]");
  }
  LossModel m;
  m.type = Type::kBernoulli;
  m.p_loss = p_loss;
  return m;
}

LossModel LossModel::gilbert(double p_loss, double p_stay) {
  if (!(p_loss >= 0.0 && p_loss <= 1.0) || !(p_stay >= 0.0 && p_stay <= 1.0)) {
    throw std::invalid_argument("packet_loss: probabilities must be in [0, 1]");
  }
  if (p_loss < 1.0) {
    // good->bad rate that makes p_loss the stationary loss probability
    const double q = p_loss * (1.0 - p_stay) / (1.0 - p_loss);
    if (q > 1.0) {
      throw std::invalid_argument(
          "packet_loss: no gilbert chain has this stationary rate");
    }
  }
  LossModel m;
  m.type = Type::kGilbert;
  m.p_loss = p_loss;
  m.p_stay = p_stay;
  return m;
}

std::pair<AudioBuffer, std::vector<uint8_t>> packet_loss(
    const AudioBuffer& speech, double packet_ms, const LossModel& model,
    RandomStream& stream) {
  speech.validate("packet_loss");
  if (!(packet_ms > 0.0)) {
    throw std::invalid_argument("packet_loss: packet length must be positive");
  }
  const size_t pkt = static_cast<size_t>(std::max<long long>(
      1, std::llround(packet_ms * speech.sample_rate / 1000.0)));
  const size_t n_packets = (speech.size() + pkt - 1) / pkt;

  std::vector<uint8_t> mask(n_packets, 0);
  if (model.type == LossModel::Type::kBernoulli) {
    for (size_t i = 0; i < n_packets; ++i) {
      mask[i] = stream.uniform() < model.p_loss ? 1 : 0;
    }
  } else {
    const double q = model.p_loss < 1.0
                         ? model.p_loss * (1.0 - model.p_stay) /
                               (1.0 - model.p_loss)
                         : 1.0;
    bool bad = stream.uniform() < model.p_loss;
    for (size_t i = 0; i < n_packets; ++i) {
      mask[i] = bad ? 1 : 0;
      const double u = stream.uniform();
      bad = bad ? (u < model.p_stay) : (u < q);
    }
  }

  AudioBuffer out = speech;
  for (size_t i = 0; i < n_packets; ++i) {
    if (!mask[i]) continue;
    const size_t lo = i * pkt;
    const size_t hi = std::min(lo + pkt, out.size());
    std::fill(out.samples.begin() + static_cast<long>(lo),
              out.samples.begin() + static_cast<long>(hi), 0.0);
  }
  return {std::move(out), std::move(mask)};
}

AudioBuffer wind_noise(const AudioBuffer& speech, double gain_db,
                       RandomStream& stream, nlohmann::json* info) {
  speech.validate("wind_noise");
  if (std::isinf(gain_db) && gain_db < 0.0) {
    if (info != nullptr) *info = nlohmann::json{{"gain_db", "-inf"}};
    return speech;
  }
  if (std::isnan(gain_db) || (std::isinf(gain_db) && gain_db > 0.0)) {
    throw std::invalid_argument("wind_noise: gain must be finite or -inf");
  }
  const size_t n = speech.size();
  if (n == 0) return speech;
  const int fs = speech.sample_rate;

  // Gust envelope: two slow sinusoids (0.5..2 Hz) with random phases.
  const double f1 = 0.5 + 1.5 * stream.uniform();
  const double f2 = 0.5 + 1.5 * stream.uniform();
  const double ph1 = 2.0 * M_PI * stream.uniform();
  const double ph2 = 2.0 * M_PI * stream.uniform();

  // Brownian base: integrated white noise, mean removed, then lowpassed.
  std::vector<double> walk(n);
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += stream.gaussian();
    walk[i] = acc;
  }
  double mean = 0.0;
  for (double v : walk) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : walk) v -= mean;

  const double lp_cut = std::min(300.0, 0.45 * fs);
  const auto h = design_lowpass(lp_cut, fs, 16.0);
  const size_t delay = h.size() / 2;
  auto smooth = convolve(walk, h, ConvolveMode::kFull);

  std::vector<double> wind(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env = 0.25 * (1.0 + std::sin(2.0 * M_PI * f1 * t + ph1)) +
                       0.25 * (1.0 + std::sin(2.0 * M_PI * f2 * t + ph2));
    wind[i] = smooth[delay + i] * env;
  }

  const double es = speech.energy();
  const double ew = energy_of(wind);
  double alpha = 0.0;
  if (es > 0.0 && ew > 0.0) {
    alpha = std::sqrt(es * std::pow(10.0, gain_db / 10.0) / ew);
  }

  AudioBuffer out = speech;
  for (size_t i = 0; i < n; ++i) out.samples[i] += alpha * wind[i];
  if (info != nullptr) {
    *info = nlohmann::json{{"gain_db", gain_db},
                           {"gust_hz", {f1, f2}},
                           {"scale", alpha}};
  }
  return out;
}

nlohmann::json Recipe::to_json() const {
  nlohmann::json steps_j = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_j.push_back({{"kind", s.kind}, {"params", s.params}});
  }
  return nlohmann::json{{"steps", steps_j}};
}

Recipe Recipe::from_json(const nlohmann::json& j) {
  Recipe r;
  if (!j.contains("steps") || !j["steps"].is_array()) {
    throw std::invalid_argument("recipe: missing steps array");
  }
  for (const auto& sj : j["steps"]) {
    Step s;
    s.kind = sj.at("kind").get<std::string>();
    if (std::find(kStepKinds.begin(), kStepKinds.end(), s.kind) ==
        kStepKinds.end()) {
      std::string valid;
      for (const auto& k : kStepKinds) valid += k + " ";
      throw std::invalid_argument("recipe: unknown step kind '" + s.kind +
                                  "' (valid: " + valid + ")");
    }
    s.params = sj.value("params", nlohmann::json::object());
    r.steps.push_back(std::move(s));
  }
  return r;
}

const AudioBuffer& AssetBank::noise(const std::string& name) const {
  auto it = noises.find(name);
  if (it == noises.end()) {
    throw std::invalid_argument("asset bank: unknown noise '" + name + "'");
  }
  return it->second;
}

const AudioBuffer& AssetBank::rir(const std::string& name) const {
  auto it = rirs.find(name);
  if (it == rirs.end()) {
    throw std::invalid_argument("asset bank: unknown rir '" + name + "'");
  }
  return it->second;
}

DegradedPair apply_recipe(const AudioBuffer& clean, const Recipe& recipe,
                          const AssetBank& bank, uint64_t root_seed,
                          const std::string& item_id,
                          const rir::TargetSpec& target_spec) {
  clean.validate("apply_recipe");
  int reverb_count = 0;
  for (const auto& s : recipe.steps) {
    if (s.kind == "reverb") ++reverb_count;
  }
  if (reverb_count > 1) {
    throw std::invalid_argument("apply_recipe: at most one reverb step");
  }

  RandomStream stream = derive_stream(root_seed, item_id);
  AudioBuffer current = clean;
  AudioBuffer target = clean;
  nlohmann::json steps_meta = nlohmann::json::array();

  for (const auto& step : recipe.steps) {
    nlohmann::json meta{{"kind", step.kind}};
    const auto& prm = step.params;

    if (step.kind == "noise") {
      const auto& noise = bank.noise(prm.at("noise").get<std::string>());
      nlohmann::json info;
      current = add_noise(current, noise, prm.at("snr_db").get<double>(),
                          &stream, &info);
      meta["noise"] = prm.at("noise");
      meta.update(info);
    } else if (step.kind == "reverb") {
      const std::string name = prm.at("rir").get<std::string>();
      const auto& rir_buf = bank.rir(name);
      if (rir_buf.sample_rate != clean.sample_rate) {
        throw std::invalid_argument(
            "apply_recipe: rir sample rate mismatch for asset '" + name + "'");
      }
      const double win_ms = prm.value("early_window_ms", 50.0);
      const auto dec = rir::decompose(rir_buf, win_ms);
      current = rir::render_reverberant(current, rir_buf);
      target = rir::make_target(clean, dec, target_spec);
      meta["rir"] = name;
      meta["direct_index"] = dec.direct_index;
      meta["gain"] = dec.gain;
      meta["target"] = target_spec.to_string();
    } else if (step.kind == "clipping") {
      const double ratio = prm.at("threshold_ratio").get<double>();
      const double thr = ratio * current.peak_abs();
      current = clip(current, ratio);
      meta["threshold_ratio"] = ratio;
      meta["threshold_abs"] = thr;
    } else if (step.kind == "bandwidth") {
      const double cutoff = prm.at("cutoff_hz").get<double>();
      current = bandlimit(current, cutoff);
      meta["cutoff_hz"] = cutoff;
    } else if (step.kind == "codec") {
      const int bits = prm.at("bits").get<int>();
      const bool mulaw = prm.value("mulaw", true);
      current = codec_crush(current, bits, mulaw);
      meta["bits"] = bits;
      meta["mulaw"] = mulaw;
    } else if (step.kind == "packet_loss") {
      const double pkt_ms = prm.at("packet_ms").get<double>();
      const std::string model_name = prm.value("model", "bernoulli");
      LossModel model;
      if (model_name == "bernoulli") {
        model = LossModel::bernoulli(prm.at("p_loss").get<double>());
      } else if (model_name == "gilbert") {
        model = LossModel::gilbert(prm.at("p_loss").get<double>(),
                                   prm.at("p_stay").get<double>());
      } else {
        throw std::invalid_argument("apply_recipe: unknown loss model '" +
                                    model_name + "'");
      }
      auto [lossy, mask] = packet_loss(current, pkt_ms, model, stream);
      current = std::move(lossy);
      size_t lost = 0;
      for (auto b : mask) lost += b;
      meta["model"] = model_name;
      meta["packet_ms"] = pkt_ms;
      meta["n_packets"] = mask.size();
      meta["n_lost"] = lost;
      meta["mask_digest"] = digest_bytes(mask);
    } else if (step.kind == "wind") {
      nlohmann::json info;
      current = wind_noise(current, prm.at("gain_db").get<double>(), stream,
                           &info);
      meta.update(info);
    } else {
      std::string valid;
      for (const auto& k : kStepKinds) valid += k + " ";
      throw std::invalid_argument("apply_recipe: unknown step kind '" +
                                  step.kind + "' (valid: " + valid + ")");
    }
    steps_meta.push_back(std::move(meta));
  }

  DegradedPair pair;
  pair.input = std::move(current);
  pair.target = std::move(target);
  pair.metadata = nlohmann::json{{"item_id", item_id},
                                 {"root_seed", root_seed},
                                 {"target", target_spec.to_string()},
                                 {"steps", std::move(steps_meta)}};
  return pair;
}

}  // namespace uselab::degrade
