#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msic/data/corpus.hpp"

namespace msic::data {

/// Configuration of the planted-rule corpus generator. Rule tables are
/// explicit (source index, implied index) pairs; `default_rules()` installs
/// the standard modular tables for the configured vocabulary sizes.
struct PlantedConfig {
  int symptom_vocab = 30;
  int diagnosis_vocab = 40;
  int medication_vocab = 20;
  int patients = 500;
  double mean_visits = 2.1;
  int min_visits = 1;
  int max_visits = 6;
  double noise = 0.05;            // drop probability for rule-implied events
  double extra_rate = 0.1;        // chance of one random extra event per kind
  double progression_prob = 0.8;  // diagnosis -> next-visit symptom firing
  int base_symptoms_min = 1;
  int base_symptoms_max = 3;
  bool with_reports = true;

  // Rule tables: symptom -> implied diagnosis, diagnosis -> implied
  // medication, diagnosis -> next-visit symptom (progression).
  std::vector<std::pair<int, int>> sym_to_diag;
  std::vector<std::pair<int, int>> diag_to_med;
  std::vector<std::pair<int, int>> diag_to_next_sym;

  /// Installs the modular default rules: symptom i implies diagnosis
  /// i mod |D|; diagnosis j implies medication j mod |M|; diagnosis j
  /// progresses to symptom (j + 3) mod |S|.
  void default_rules();

  /// Throws ConfigError on inconsistent settings or out-of-range rules.
  void validate() const;
};

/// Deterministic corpus generation: same (config, seed) yields byte-identical
/// corpora. Every visit's diagnoses contain each rule-implied diagnosis with
/// probability 1 - noise (exactly all of them at noise 0).
Corpus generate_planted_corpus(const PlantedConfig& config,
                               std::uint64_t seed);

/// The fixed event vocabularies for the given sizes ("S00", "D07", ...).
Vocabulary planted_vocabulary(Kind kind, int size);

/// The fixed word vocabulary of the report templates (reserved tokens first).
Vocabulary planted_word_vocabulary();

/// Two-word template phrase for one event code, used by the report renderer
/// and by tests that assert report/event alignment.
std::vector<std::string> planted_phrase(Kind kind, int index);

}  // namespace msic::data
