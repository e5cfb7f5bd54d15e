#pragma once

#include <map>
#include <string>
#include <vector>

#include "msic/data/corpus.hpp"
#include "msic/eval/metric_value.hpp"

namespace msic::eval {

enum class ProfileKind { kUnigram, kBigram, kSequentialBigram };

/// Normalized event-frequency profile of a corpus. Keys are canonical
/// strings over (kind, code) items:
///   unigram              "symptom:S03"
///   same-visit bigram    "symptom:S03&diagnosis:D01"  (unordered,
///                        canonicalized by kind order then code index)
///   sequential bigram    "symptom:S03>diagnosis:D01"  (visit t item
///                        before visit t+1 item, ordered)
/// Unigrams count one per visit containing the item; same-visit
/// bigrams one per unordered item pair within a visit (across the
/// included kinds); sequential bigrams one per ordered pair across
/// consecutive visits. Frequencies are normalized to sum to one.
struct FrequencyProfile {
  ProfileKind kind = ProfileKind::kUnigram;
  std::map<std::string, double> freq;

  static FrequencyProfile unigram(
      const data::Corpus& corpus,
      const std::vector<data::Kind>& kinds = all_kinds());
  static FrequencyProfile bigram(
      const data::Corpus& corpus,
      const std::vector<data::Kind>& kinds = all_kinds());
  static FrequencyProfile sequential_bigram(
      const data::Corpus& corpus,
      const std::vector<data::Kind>& kinds = all_kinds());

  static std::vector<data::Kind> all_kinds() {
    return {data::Kind::kSymptom, data::Kind::kDiagnosis,
            data::Kind::kMedication};
  }
};

/// R-squared of the synthetic profile against the real one over the
/// union of keys (real corpus as reference). Null when the reference
/// has zero variance or both profiles are empty.
MetricValue similarity_score(const FrequencyProfile& real,
                             const FrequencyProfile& synthetic);

/// Pearson correlation between per-code visit-occurrence rates of the
/// two corpora, concatenated over the full symptom, diagnosis, and
/// medication vocabularies. Identical rate vectors score exactly 1;
/// otherwise zero variance on either side yields a null result.
MetricValue dimwise_fidelity(const data::Corpus& real,
                             const data::Corpus& synthetic);

}  // namespace msic::eval
