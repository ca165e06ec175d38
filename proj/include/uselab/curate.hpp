// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "uselab/audio.hpp"

namespace uselab::curate {

struct ManifestEntry {
  std::string id;
  std::string path;
  std::string source;
  double duration_s = 0.0;
  int sample_rate = 0;
};

// Reads a JSONL manifest (one object per line: id, path, source, duration_s,
// sample_rate). Parse errors report the offending line number; duplicate ids
// are rejected.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path);

// Cheap whole-file quality proxy in [0, 1]: spread between the 90th and 10th
// percentile of 32 ms frame log-energies, scaled by a 60 dB range. Flat or
// silent audio scores 0; wide-dynamic clean speech scores high. This is a
// stand-in for a learned quality scorer and is only calibrated to order
// recordings, not to match absolute opinion scores.
double proxy_quality_score(const AudioBuffer& audio);

struct Histogram {
  std::vector<double> edges;   // n_bins + 1 edges over [0, 1]
  std::vector<size_t> counts;  // n_bins counts
};

Histogram quality_histogram(const std::vector<double>& scores, size_t n_bins);

// Median with the lower-midpoint convention: average of the two middle order
// statistics for even counts.
double median(std::vector<double> values);

struct SourceStats {
  size_t n_items = 0;
  double hours = 0.0;
  double median_score = 0.0;
  Histogram histogram;
};

struct FilterReport {
  double threshold = 0.0;
  std::vector<std::string> kept_ids;
  std::vector<std::string> dropped_ids;
  double kept_hours = 0.0;
  double dropped_hours = 0.0;
  std::map<std::string, SourceStats> per_source;

  nlohmann::json to_json() const;
};

// Keeps entries whose score >= threshold (inclusive). `scores` is aligned
// with `entries`.
FilterReport filter_by_threshold(const std::vector<ManifestEntry>& entries,
                                 const std::vector<double>& scores,
                                 double threshold, size_t hist_bins = 20);

// Score sidecar files: JSONL of {"id", "score"}.
std::map<std::string, double> read_scores(const std::string& path);
void write_scores(const std::vector<std::pair<std::string, double>>& scores,
                  const std::string& path);

// Published operating points of the upstream corpus this tool mirrors:
// proxy thresholds and the corpus hours they retain. Kept as annotation data
// for reports; nothing in the filtering logic depends on them.
struct CorpusAnchor {
  double threshold;
  double hours;
};
inline constexpr CorpusAnchor kCorpusAnchors[] = {
    {0.50, 2518.0}, {0.65, 2506.0}, {0.72, 629.0}};

}  // namespace uselab::curate
