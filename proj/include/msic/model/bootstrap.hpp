#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/data/vocab.hpp"

namespace msic::model {

/// Training-corpus statistics used to bootstrap de-novo records:
/// per-kind first-visit marginal code rates and set-size histograms,
/// plus the record-length histogram. Serialized into checkpoints as
/// "stats."-prefixed tensors so synthesis needs no corpus access.
struct BootstrapStats {
  // rate[kind][code] = fraction of first visits containing the code.
  std::vector<double> rates[3];
  // size_hist[kind][k] = P(first-visit set size == k), k = 0..max seen.
  std::vector<double> size_hist[3];
  // visit_count_hist[i] = P(record has i+1 visits).
  std::vector<double> visit_count_hist;

  static BootstrapStats from_corpus(const data::Corpus& corpus) {
    if (corpus.records.empty()) {
      throw ValidationError("bootstrap statistics need a non-empty corpus");
    }
    BootstrapStats out;
    const std::size_t sizes[3] = {
        static_cast<std::size_t>(corpus.vocabs.symptom.size()),
        static_cast<std::size_t>(corpus.vocabs.diagnosis.size()),
        static_cast<std::size_t>(corpus.vocabs.medication.size())};
    std::size_t max_visits = 0;
    for (int k = 0; k < 3; ++k) out.rates[k].assign(sizes[k], 0.0);
    for (const auto& rec : corpus.records) {
      max_visits = std::max(max_visits, rec.visits.size());
      const data::Visit& first = rec.visits.front();
      for (int k = 0; k < 3; ++k) {
        const data::EventSet& set = first.events(static_cast<data::Kind>(k));
        for (int idx : set.indices) out.rates[k][idx] += 1.0;
        if (out.size_hist[k].size() <= set.size()) {
          out.size_hist[k].resize(set.size() + 1, 0.0);
        }
        out.size_hist[k][set.size()] += 1.0;
      }
    }
    out.visit_count_hist.assign(max_visits, 0.0);
    for (const auto& rec : corpus.records) {
      out.visit_count_hist[rec.visits.size() - 1] += 1.0;
    }
    const double n = static_cast<double>(corpus.records.size());
    for (int k = 0; k < 3; ++k) {
      for (double& r : out.rates[k]) r /= n;
      for (double& p : out.size_hist[k]) p /= n;
    }
    for (double& p : out.visit_count_hist) p /= n;
    return out;
  }

  /// Draws a record length (>= 1) from the empirical histogram.
  int sample_visit_count(Rng& rng) const {
    return 1 + sample_index(visit_count_hist, rng);
  }

  /// Draws an event set for a first visit: a size from the empirical
  /// histogram, then that many distinct codes weighted by marginal
  /// rate (sequential renormalized draws).
  data::EventSet sample_first_visit_set(data::Kind kind, Rng& rng) const {
    const int k = static_cast<int>(kind);
    const int vocab = static_cast<int>(rates[k].size());
    int want = sample_index(size_hist[k], rng);
    std::vector<double> weight = rates[k];
    std::vector<int> picked;
    while (static_cast<int>(picked.size()) < want) {
      double total = 0.0;
      for (double w : weight) total += w;
      int idx;
      if (total <= 0.0) {
        // all remaining weights zero: fall back to uniform
        do {
          idx = static_cast<int>(rng.uniform_int(
              static_cast<std::uint64_t>(vocab)));
        } while (weight[idx] < 0.0);
      } else {
        double u = rng.uniform() * total;
        double acc = 0.0;
        idx = -1;
        for (int i = 0; i < vocab; ++i) {
          if (weight[i] < 0.0) continue;
          acc += weight[i];
          if (u < acc) {
            idx = i;
            break;
          }
        }
        if (idx < 0) {  // numerical edge: take the last eligible code
          for (int i = vocab - 1; i >= 0; --i) {
            if (weight[i] >= 0.0) {
              idx = i;
              break;
            }
          }
        }
      }
      picked.push_back(idx);
      weight[idx] = -1.0;  // mark as taken
    }
    return data::EventSet::from_indices(kind, picked, vocab);
  }

  /// Flattens into named row tensors for checkpoint embedding.
  std::map<std::string, std::vector<float>> to_tensors() const {
    std::map<std::string, std::vector<float>> out;
    const char* names[3] = {"symptom", "diagnosis", "medication"};
    for (int k = 0; k < 3; ++k) {
      out["stats.rate." + std::string(names[k])] = to_float(rates[k]);
      out["stats.size_hist." + std::string(names[k])] = to_float(size_hist[k]);
    }
    out["stats.visit_count_hist"] = to_float(visit_count_hist);
    return out;
  }

  static BootstrapStats from_tensors(
      const std::map<std::string, std::vector<float>>& tensors) {
    BootstrapStats out;
    const char* names[3] = {"symptom", "diagnosis", "medication"};
    for (int k = 0; k < 3; ++k) {
      out.rates[k] = require(tensors, "stats.rate." + std::string(names[k]));
      out.size_hist[k] =
          require(tensors, "stats.size_hist." + std::string(names[k]));
    }
    out.visit_count_hist = require(tensors, "stats.visit_count_hist");
    return out;
  }

 private:
  static int sample_index(const std::vector<double>& hist, Rng& rng) {
    if (hist.empty()) throw ValidationError("empty bootstrap histogram");
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
      acc += hist[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(hist.size()) - 1;
  }

  static std::vector<float> to_float(const std::vector<double>& v) {
    return std::vector<float>(v.begin(), v.end());
  }

  static std::vector<double> require(
      const std::map<std::string, std::vector<float>>& tensors,
      const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw ValidationError("checkpoint is missing tensor " + name);
    }
    return std::vector<double>(it->second.begin(), it->second.end());
  }
};

}  // namespace msic::model
