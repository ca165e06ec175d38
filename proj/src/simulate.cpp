// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/simulate.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "uselab/util.hpp"

namespace uselab::degrade {

namespace fs = std::filesystem;

std::map<std::string, AudioBuffer> load_wav_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("asset directory not found: " + dir);
  }
  std::map<std::string, AudioBuffer> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
    out[e.path().stem().string()] = read_wav(e.path().string());
  }
  return out;
}

nlohmann::json simulate(const std::vector<SimulateItem>& items,
                        const AssetBank& bank, const SimulateOptions& opts) {
  if (opts.workers == 0) {
    throw std::invalid_argument("simulate: workers must be >= 1");
  }
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec || !fs::is_directory(opts.out_dir)) {
    throw IoError("cannot create output directory: " + opts.out_dir);
  }

  struct ItemResult {
    nlohmann::json meta;
  };
  std::vector<ItemResult> results(items.size());
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  size_t first_error_index = items.size();

  auto run_item = [&](size_t i) {
    const auto& item = items[i];
    const AudioBuffer clean = read_wav(item.entry.path);
    auto pair = apply_recipe(clean, item.recipe, bank, opts.root_seed,
                             item.entry.id, opts.target);

    const std::string in_path =
        (fs::path(opts.out_dir) / (item.entry.id + "_input.wav")).string();
    const std::string tg_path =
        (fs::path(opts.out_dir) / (item.entry.id + "_target.wav")).string();
    const size_t clamped_in = write_wav(pair.input, in_path, opts.encoding);
    const size_t clamped_tg = write_wav(pair.target, tg_path, opts.encoding);

    nlohmann::json meta = pair.metadata;
    meta["input_path"] = in_path;
    meta["target_path"] = tg_path;
    meta["input_digest"] = digest_doubles(pair.input.samples);
    meta["target_digest"] = digest_doubles(pair.target.samples);
    meta["clamped_samples"] = clamped_in + clamped_tg;
    results[i].meta = std::move(meta);
  };

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        run_item(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  if (opts.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const size_t n_threads = std::min(opts.workers, std::max<size_t>(1, items.size()));
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  const std::string meta_path =
      (fs::path(opts.out_dir) / "metadata.jsonl").string();
  std::ofstream mf(meta_path);
  if (!mf) throw IoError("cannot write metadata: " + meta_path);
  // The combined digest covers item ids and sample digests only, never
  // output paths, so runs into different directories certify as equal.
  uint64_t combined = 0xcbf29ce484222325ULL;
  nlohmann::json item_list = nlohmann::json::array();
  for (const auto& r : results) {
    mf << r.meta.dump() << "\n";
    combined = fnv1a64(r.meta["item_id"].get<std::string>(), combined);
    combined = fnv1a64(r.meta["input_digest"].get<std::string>(), combined);
    combined = fnv1a64(r.meta["target_digest"].get<std::string>(), combined);
    item_list.push_back({{"item_id", r.meta["item_id"]},
                         {"input_digest", r.meta["input_digest"]},
                         {"target_digest", r.meta["target_digest"]}});
  }
  if (!mf) throw IoError("failed to write metadata: " + meta_path);

  return nlohmann::json{{"n_items", items.size()},
                        {"out_dir", opts.out_dir},
                        {"metadata_path", meta_path},
                        {"digest", to_hex(combined)},
                        {"items", item_list}};
}

}  // namespace uselab::degrade
