// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Python bindings for the core operations. Audio is exchanged as 1-D
// float64 numpy arrays plus an explicit sample rate; spectrogram grids as
// 2-D complex128 arrays (frames x bins).

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "uselab/curate.hpp"
#include "uselab/degrade.hpp"
#include "uselab/dp_oracle.hpp"
#include "uselab/dsp.hpp"
#include "uselab/metrics.hpp"
#include "uselab/random_stream.hpp"
#include "uselab/rir.hpp"
#include "uselab/sfi_stft.hpp"
#include "uselab/two_stage.hpp"
#include "uselab/wav.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

uselab::AudioBuffer to_buffer(const py::array_t<double>& x, int fs) {
  if (x.ndim() != 1) throw std::invalid_argument("audio must be 1-D");
  uselab::AudioBuffer buf;
  buf.sample_rate = fs;
  buf.samples.assign(x.data(), x.data() + x.size());
  return buf;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

uselab::sfi::FrameGrid to_grid(const py::array_t<std::complex<double>>& z,
                               int fs, size_t original_length) {
  if (z.ndim() != 2) throw std::invalid_argument("grid must be 2-D");
  uselab::sfi::FrameGrid grid;
  grid.params = uselab::sfi::SfiParams::for_rate(fs);
  grid.n_frames = static_cast<size_t>(z.shape(0));
  if (static_cast<size_t>(z.shape(1)) != grid.params.n_bins) {
    throw std::invalid_argument("grid has the wrong number of bins");
  }
  grid.original_length = original_length;
  const auto r = z.unchecked<2>();
  grid.data.resize(grid.n_frames * grid.params.n_bins);
  for (py::ssize_t f = 0; f < z.shape(0); ++f) {
    for (py::ssize_t b = 0; b < z.shape(1); ++b) {
      grid.data[size_t(f) * grid.params.n_bins + size_t(b)] = r(f, b);
    }
  }
  return grid;
}

py::array_t<std::complex<double>> from_grid(const uselab::sfi::FrameGrid& g) {
  py::array_t<std::complex<double>> out(
      {py::ssize_t(g.n_frames), py::ssize_t(g.params.n_bins)});
  auto w = out.mutable_unchecked<2>();
  for (size_t f = 0; f < g.n_frames; ++f) {
    for (size_t b = 0; b < g.params.n_bins; ++b) {
      w(py::ssize_t(f), py::ssize_t(b)) = g.at(f, b);
    }
  }
  return out;
}

json json_from_py_str(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": " + e.what());
  }
}

uselab::dp::DiscreteJointModel model_from_spec(const std::string& spec) {
  if (spec == "gaussian") return uselab::dp::DiscreteJointModel::gaussian_grid();
  if (spec == "binary") {
    return uselab::dp::DiscreteJointModel::binary_uninformative();
  }
  if (spec == "deterministic") {
    return uselab::dp::DiscreteJointModel::deterministic(
        {-2.0, -1.0, 0.0, 1.0, 2.0});
  }
  return uselab::dp::DiscreteJointModel::from_json(
      json_from_py_str(spec, "model"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "speech degradation, analysis and curation toolkit";

  // --- audio i/o and resampling ------------------------------------------
  m.def(
      "read_wav",
      [](const std::string& path) {
        const auto buf = uselab::read_wav(path);
        return py::make_tuple(to_array(buf.samples), buf.sample_rate);
      },
      py::arg("path"), "Read a mono wav file; returns (samples, sample_rate).");

  m.def(
      "write_wav",
      [](const py::array_t<double>& x, int fs, const std::string& path,
         const std::string& encoding) {
        return uselab::write_wav(to_buffer(x, fs), path,
                                 uselab::wav_encoding_from_string(encoding));
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("path"),
      py::arg("encoding") = "float32",
      "Write a mono wav file; returns the number of clamped samples.");

  m.def(
      "resample",
      [](const py::array_t<double>& x, int fs, int target_fs) {
        return to_array(uselab::resample(to_buffer(x, fs), target_fs).samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_rate"));

  m.def("supported_rates", []() {
    return std::vector<int>(uselab::kSupportedRates.begin(),
                            uselab::kSupportedRates.end());
  });

  // --- sfi stft ------------------------------------------------------------
  m.def(
      "stft",
      [](const py::array_t<double>& x, int fs) {
        return from_grid(uselab::sfi::stft(to_buffer(x, fs)));
      },
      py::arg("samples"), py::arg("sample_rate"),
      "Rate-scaled 40 ms / 50% overlap stft; returns frames x bins.");

  m.def(
      "istft",
      [](const py::array_t<std::complex<double>>& z, int fs, size_t length) {
        return to_array(uselab::sfi::istft(to_grid(z, fs, length)).samples);
      },
      py::arg("grid"), py::arg("sample_rate"), py::arg("length"),
      "Inverse stft back to `length` samples.");

  m.def(
      "band_partition",
      [](int fs, double width) {
        py::list out;
        for (const auto& b : uselab::sfi::band_partition(fs, width).bands) {
          py::dict d;
          d["lo_bin"] = b.lo_bin;
          d["hi_bin"] = b.hi_bin;
          d["lo_hz"] = b.lo_hz;
          d["hi_hz"] = b.hi_hz;
          out.append(d);
        }
        return out;
      },
      py::arg("sample_rate"), py::arg("band_width_hz") = 4000.0);

  // --- rir ------------------------------------------------------------------
  m.def(
      "rir_decompose",
      [](const py::array_t<double>& rir, int fs, double window_ms) {
        const auto dec = uselab::rir::decompose(to_buffer(rir, fs), window_ms);
        py::dict d;
        d["direct_index"] = dec.direct_index;
        d["gain"] = dec.gain;
        d["pre_peak"] = to_array(dec.pre_peak);
        d["early"] = to_array(dec.early);
        d["late"] = to_array(dec.late);
        return d;
      },
      py::arg("rir"), py::arg("sample_rate"), py::arg("early_window_ms") = 50.0);

  m.def(
      "render_reverberant",
      [](const py::array_t<double>& speech, const py::array_t<double>& rir,
         int fs) {
        return to_array(uselab::rir::render_reverberant(to_buffer(speech, fs),
                                                        to_buffer(rir, fs))
                            .samples);
      },
      py::arg("speech"), py::arg("rir"), py::arg("sample_rate"));

  m.def(
      "make_target",
      [](const py::array_t<double>& speech, const py::array_t<double>& rir,
         int fs, const std::string& target) {
        const auto dec = uselab::rir::decompose(to_buffer(rir, fs));
        return to_array(uselab::rir::make_target(
                            to_buffer(speech, fs), dec,
                            uselab::rir::TargetSpec::parse(target))
                            .samples);
      },
      py::arg("speech"), py::arg("rir"), py::arg("sample_rate"),
      py::arg("target") = "shifted_anechoic");

  // --- degradations ----------------------------------------------------------
  m.def(
      "add_noise",
      [](const py::array_t<double>& speech, const py::array_t<double>& noise,
         int fs, double snr_db, uint64_t seed, const std::string& item_id) {
        uselab::RandomStream s(seed, item_id);
        return to_array(uselab::degrade::add_noise(to_buffer(speech, fs),
                                                   to_buffer(noise, fs),
                                                   snr_db, &s, nullptr)
                            .samples);
      },
      py::arg("speech"), py::arg("noise"), py::arg("sample_rate"),
      py::arg("snr_db"), py::arg("seed") = 0, py::arg("item_id") = "py");

  m.def(
      "clip",
      [](const py::array_t<double>& x, int fs, double ratio) {
        return to_array(uselab::degrade::clip(to_buffer(x, fs), ratio).samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("threshold_ratio"));

  m.def(
      "bandlimit",
      [](const py::array_t<double>& x, int fs, double cutoff_hz) {
        return to_array(
            uselab::degrade::bandlimit(to_buffer(x, fs), cutoff_hz).samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("cutoff_hz"));

  m.def(
      "codec_crush",
      [](const py::array_t<double>& x, int fs, int bits, bool mulaw) {
        return to_array(
            uselab::degrade::codec_crush(to_buffer(x, fs), bits, mulaw)
                .samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("bits"),
      py::arg("mulaw") = true);

  m.def(
      "packet_loss",
      [](const py::array_t<double>& x, int fs, double packet_ms, double p_loss,
         double p_stay, uint64_t seed, const std::string& item_id) {
        const auto model =
            p_stay > 0.0 ? uselab::degrade::LossModel::gilbert(p_loss, p_stay)
                         : uselab::degrade::LossModel::bernoulli(p_loss);
        uselab::RandomStream s(seed, item_id);
        auto [audio, mask] =
            uselab::degrade::packet_loss(to_buffer(x, fs), packet_ms, model, s);
        py::array_t<uint8_t> mask_arr(py::ssize_t(mask.size()));
        std::copy(mask.begin(), mask.end(), mask_arr.mutable_data());
        return py::make_tuple(to_array(audio.samples), mask_arr);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("packet_ms"),
      py::arg("p_loss"), py::arg("p_stay") = 0.0, py::arg("seed") = 0,
      py::arg("item_id") = "py");

  m.def(
      "wind_noise",
      [](const py::array_t<double>& x, int fs, double gain_db, uint64_t seed,
         const std::string& item_id) {
        uselab::RandomStream s(seed, item_id);
        return to_array(
            uselab::degrade::wind_noise(to_buffer(x, fs), gain_db, s, nullptr)
                .samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("gain_db"),
      py::arg("seed") = 0, py::arg("item_id") = "py");

  m.def(
      "apply_recipe",
      [](const py::array_t<double>& clean, int fs, const std::string& recipe,
         const std::map<std::string, py::array_t<double>>& noises,
         const std::map<std::string, py::array_t<double>>& rirs,
         uint64_t seed, const std::string& item_id, const std::string& target) {
        uselab::degrade::AssetBank bank;
        for (const auto& [name, arr] : noises) {
          bank.noises.emplace(name, to_buffer(arr, fs));
        }
        for (const auto& [name, arr] : rirs) {
          bank.rirs.emplace(name, to_buffer(arr, fs));
        }
        const auto pair = uselab::degrade::apply_recipe(
            to_buffer(clean, fs),
            uselab::degrade::Recipe::from_json(
                json_from_py_str(recipe, "recipe")),
            bank, seed, item_id, uselab::rir::TargetSpec::parse(target));
        return py::make_tuple(to_array(pair.input.samples),
                              to_array(pair.target.samples),
                              pair.metadata.dump());
      },
      py::arg("clean"), py::arg("sample_rate"), py::arg("recipe_json"),
      py::arg("noises") = std::map<std::string, py::array_t<double>>{},
      py::arg("rirs") = std::map<std::string, py::array_t<double>>{},
      py::arg("seed") = 0, py::arg("item_id") = "py",
      py::arg("target") = "shifted_anechoic",
      "Run a degradation recipe; returns (input, target, metadata_json).");

  // --- curation ---------------------------------------------------------------
  m.def(
      "proxy_quality_score",
      [](const py::array_t<double>& x, int fs) {
        return uselab::curate::proxy_quality_score(to_buffer(x, fs));
      },
      py::arg("samples"), py::arg("sample_rate"));

  // --- distortion/perception oracle ---------------------------------------------
  m.def(
      "dp_identity",
      [](const std::string& model) {
        const auto rep =
            uselab::dp::verify_d0_identity(model_from_spec(model));
        py::dict d;
        d["d0_direct"] = rep.d0_direct;
        d["d_star"] = rep.d_star;
        d["w2_sq"] = rep.w2_sq;
        d["residual"] = rep.residual;
        d["max_quantile_dev"] = rep.max_quantile_dev;
        return d;
      },
      py::arg("model") = "gaussian");

  m.def(
      "dp_curve",
      [](const std::string& model, const std::vector<double>& ts) {
        py::list out;
        for (const auto& pt :
             uselab::dp::dp_curve(model_from_spec(model), ts)) {
          out.append(py::make_tuple(pt.t, pt.distortion, pt.perception));
        }
        return out;
      },
      py::arg("model"), py::arg("t_grid"));

  m.def(
      "posterior_sampling_mse",
      [](const std::string& model, size_t n_samples, uint64_t seed) {
        uselab::RandomStream s(seed, "posterior-sampling");
        return uselab::dp::posterior_sampling_mse(model_from_spec(model),
                                                  n_samples, s);
      },
      py::arg("model"), py::arg("n_samples") = 100000, py::arg("seed") = 0);

  m.def(
      "mmse_distortion",
      [](const std::string& model) {
        return uselab::dp::mmse_distortion(model_from_spec(model));
      },
      py::arg("model"));

  // --- two-stage -------------------------------------------------------------------
  m.def(
      "spectral_norm",
      [](const py::array_t<double>& w) {
        if (w.ndim() != 2) throw std::invalid_argument("matrix must be 2-D");
        auto mat = uselab::twostage::Matrix::zeros(size_t(w.shape(0)),
                                                   size_t(w.shape(1)));
        const auto r = w.unchecked<2>();
        for (py::ssize_t i = 0; i < w.shape(0); ++i) {
          for (py::ssize_t j = 0; j < w.shape(1); ++j) {
            mat.at(size_t(i), size_t(j)) = r(i, j);
          }
        }
        return uselab::twostage::spectral_norm_estimate(mat);
      },
      py::arg("matrix"), "Largest singular value via power iteration.");

  m.def(
      "oracle_regression",
      [](const py::array_t<std::complex<double>>& z, int fs, size_t length,
         const std::vector<double>& noise_psd) {
        return from_grid(uselab::twostage::oracle_regression(
            to_grid(z, fs, length), noise_psd));
      },
      py::arg("grid"), py::arg("sample_rate"), py::arg("length"),
      py::arg("noise_psd"));

  m.def(
      "transport_correct",
      [](const py::array_t<std::complex<double>>& regressed,
         const py::array_t<std::complex<double>>& reference, int fs,
         size_t length, size_t n_quantiles) {
        const auto ref_grid = to_grid(reference, fs, length);
        const auto corr =
            uselab::twostage::fit_corrector({&ref_grid}, n_quantiles);
        const auto res = uselab::twostage::transport_correct(
            to_grid(regressed, fs, length), corr);
        return py::make_tuple(from_grid(res.final), from_grid(res.correction));
      },
      py::arg("regressed"), py::arg("reference"), py::arg("sample_rate"),
      py::arg("length"), py::arg("n_quantiles") = 256,
      "Fit a per-bin quantile corrector on `reference` and apply it; "
      "returns (final, correction) with final == regressed + correction.");

  m.def(
      "residual_correlation",
      [](const py::array_t<std::complex<double>>& clean,
         const py::array_t<std::complex<double>>& regressed,
         const py::array_t<std::complex<double>>& final, int fs,
         size_t length) {
        return uselab::twostage::residual_correlation(
            to_grid(clean, fs, length), to_grid(regressed, fs, length),
            to_grid(final, fs, length));
      },
      py::arg("clean"), py::arg("regressed"), py::arg("final"),
      py::arg("sample_rate"), py::arg("length"));

  // --- metrics -------------------------------------------------------------------
  m.def(
      "evaluate",
      [](const py::array_t<double>& ref, const py::array_t<double>& est,
         int fs) {
        const auto j = uselab::metrics::evaluate(to_buffer(ref, fs),
                                                 to_buffer(est, fs));
        py::dict d;
        d["sdr_db"] = j["sdr_db"].get<double>();
        d["lsd_db"] = j["lsd_db"].get<double>();
        d["mcd"] = j["mcd"].get<double>();
        return d;
      },
      py::arg("reference"), py::arg("estimate"), py::arg("sample_rate"));

  // error mapping: invalid_argument -> ValueError, IoError -> OSError
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const uselab::IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });
}
