#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msic/data/vocab.hpp"

namespace msic::data {

/// Sparse view of one binary event vector: sorted unique vocabulary indices.
struct EventSet {
  Kind kind = Kind::kSymptom;
  std::vector<int> indices;

  /// Sorts, deduplicates, and range-checks the given indices.
  static EventSet from_indices(Kind kind, std::vector<int> indices,
                               int vocab_size);

  bool contains(int index) const;
  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
};

/// Three whitespace-tokenized paragraphs over the word vocabulary.
struct Report {
  std::vector<std::string> chief_complaint;
  std::vector<std::string> present_illness;
  std::vector<std::string> prescription;

  const std::vector<std::string>& paragraph(Kind kind) const;
};

struct Visit {
  EventSet symptoms{Kind::kSymptom, {}};
  EventSet diagnoses{Kind::kDiagnosis, {}};
  EventSet medications{Kind::kMedication, {}};
  std::optional<Report> report;

  const EventSet& events(Kind kind) const;
  EventSet& events(Kind kind);
};

struct PatientRecord {
  std::string patient_id;
  std::vector<Visit> visits;
};

struct Corpus {
  VocabSet vocabs;
  std::vector<PatientRecord> records;

  std::size_t patient_count() const { return records.size(); }
  std::size_t visit_count() const;
};

/// Lower-cases and splits on runs of whitespace.
std::vector<std::string> tokenize(const std::string& text);
std::string join_tokens(const std::vector<std::string>& tokens);

/// Token strings to word-vocabulary ids; unknown tokens map to <unk>.
std::vector<int> to_word_ids(const std::vector<std::string>& tokens,
                             const Vocabulary& words);
std::vector<std::string> to_word_strings(const std::vector<int>& ids,
                                         const Vocabulary& words);

/// Reads a line-delimited corpus file; one JSON patient record per line.
/// Unknown event codes raise ValidationError naming the code; malformed
/// lines raise ParseError with the line number. Report tokens absent from
/// the word vocabulary are mapped to <unk>.
Corpus parse_corpus(const std::string& path, const VocabSet& vocabs);

/// Serializes in the same line-delimited format (stable field order,
/// deterministic bytes).
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

}  // namespace msic::data
