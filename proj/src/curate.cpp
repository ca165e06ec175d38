// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/curate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace uselab::curate {

namespace {

// Linear-interpolated percentile of a sorted vector, q in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.path = j.value("path", "");
      e.source = j.value("source", "unknown");
      e.duration_s = j.at("duration_s").get<double>();
      e.sample_rate = j.value("sample_rate", 0);
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": " + ex.what());
    }
    if (e.duration_s < 0.0) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": negative duration");
    }
    if (!seen.insert(e.id).second) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": duplicate id '" + e.id + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open manifest for writing: " + path);
  for (const auto& e : entries) {
    nlohmann::json j{{"id", e.id},
                     {"path", e.path},
                     {"source", e.source},
                     {"duration_s", e.duration_s},
                     {"sample_rate", e.sample_rate}};
    f << j.dump() << "\n";
  }
  if (!f) throw IoError("failed to write manifest: " + path);
}

double proxy_quality_score(const AudioBuffer& audio) {
  audio.validate("proxy_quality_score");
  if (audio.empty()) return 0.0;

  const size_t frame = std::max<size_t>(
      1, static_cast<size_t>(std::llround(0.032 * audio.sample_rate)));
  const size_t hop = std::max<size_t>(1, frame / 2);

  std::vector<double> levels;
  for (size_t start = 0; start + frame <= audio.size() || start == 0;
       start += hop) {
    const size_t end = std::min(start + frame, audio.size());
    if (end <= start) break;
    double e = 0.0;
    for (size_t i = start; i < end; ++i) {
      e += audio.samples[i] * audio.samples[i];
    }
    e /= static_cast<double>(end - start);
    levels.push_back(10.0 * std::log10(e + 1e-20));
    if (end == audio.size()) break;
  }
  if (levels.empty()) return 0.0;

  std::sort(levels.begin(), levels.end());
  const double spread =
      percentile_sorted(levels, 0.9) - percentile_sorted(levels, 0.1);
  return std::clamp(spread / 60.0, 0.0, 1.0);
}

Histogram quality_histogram(const std::vector<double>& scores,
                            size_t n_bins) {
  if (scores.empty()) {
    throw std::invalid_argument("quality_histogram: empty scores");
  }
  if (n_bins == 0) {
    throw std::invalid_argument("quality_histogram: zero bins");
  }
  Histogram h;
  h.edges.resize(n_bins + 1);
  for (size_t i = 0; i <= n_bins; ++i) {
    h.edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
  }
  h.counts.assign(n_bins, 0);
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("quality_histogram: score outside [0, 1]");
    }
    const size_t bin = std::min(
        n_bins - 1, static_cast<size_t>(s * static_cast<double>(n_bins)));
    ++h.counts[bin];
  }
  return h;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

nlohmann::json FilterReport::to_json() const {
  nlohmann::json per_src = nlohmann::json::object();
  for (const auto& [name, st] : per_source) {
    per_src[name] = {{"n_items", st.n_items},
                     {"hours", st.hours},
                     {"median_score", st.median_score},
                     {"histogram",
                      {{"edges", st.histogram.edges},
                       {"counts", st.histogram.counts}}}};
  }
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& a : kCorpusAnchors) {
    anchors.push_back({{"threshold", a.threshold}, {"hours", a.hours}});
  }
  return nlohmann::json{{"threshold", threshold},
                        {"n_kept", kept_ids.size()},
                        {"n_dropped", dropped_ids.size()},
                        {"kept_hours", kept_hours},
                        {"dropped_hours", dropped_hours},
                        {"kept_ids", kept_ids},
                        {"dropped_ids", dropped_ids},
                        {"per_source", per_src},
                        {"reference_anchors", anchors}};
}

FilterReport filter_by_threshold(const std::vector<ManifestEntry>& entries,
                                 const std::vector<double>& scores,
                                 double threshold, size_t hist_bins) {
  if (entries.size() != scores.size()) {
    throw std::invalid_argument(
        "filter_by_threshold: entries/scores size mismatch");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument(
        "filter_by_threshold: threshold must be in [0, 1]");
  }

  FilterReport rep;
  rep.threshold = threshold;
  std::map<std::string, std::vector<double>> by_source;
  std::map<std::string, double> hours_by_source;
  std::map<std::string, size_t> items_by_source;

  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const double hours = e.duration_s / 3600.0;
    if (scores[i] >= threshold) {
      rep.kept_ids.push_back(e.id);
      rep.kept_hours += hours;
    } else {
      rep.dropped_ids.push_back(e.id);
      rep.dropped_hours += hours;
    }
    by_source[e.source].push_back(scores[i]);
    hours_by_source[e.source] += hours;
    ++items_by_source[e.source];
  }

  for (const auto& [name, src_scores] : by_source) {
    SourceStats st;
    st.n_items = items_by_source[name];
    st.hours = hours_by_source[name];
    st.median_score = median(src_scores);
    st.histogram = quality_histogram(src_scores, hist_bins);
    rep.per_source[name] = std::move(st);
  }
  return rep;
}

std::map<std::string, double> read_scores(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open scores file: " + path);
  std::map<std::string, double> scores;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      scores[j.at("id").get<std::string>()] = j.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("scores line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return scores;
}

void write_scores(const std::vector<std::pair<std::string, double>>& scores,
                  const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open scores file for writing: " + path);
  for (const auto& [id, score] : scores) {
    f << nlohmann::json{{"id", id}, {"score", score}}.dump() << "\n";
  }
  if (!f) throw IoError("failed to write scores: " + path);
}

}  // namespace uselab::curate
