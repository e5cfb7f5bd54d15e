#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "msic/core/errors.hpp"

namespace msic::data {

enum class Kind { kSymptom, kDiagnosis, kMedication, kWord };

const char* kind_name(Kind kind);
Kind kind_from_name(const std::string& name);

/// Ordered code list with a code -> position index. Line order in the vocab
/// file defines the index, so two files with the same codes in the same order
/// are the same vocabulary.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(Kind kind, std::vector<std::string> codes,
             std::vector<std::string> descriptions = {});

  Kind kind() const { return kind_; }
  const std::vector<std::string>& codes() const { return codes_; }
  const std::vector<std::string>& descriptions() const { return descriptions_; }
  int size() const { return static_cast<int>(codes_.size()); }

  /// Position of `code`, or -1 when absent.
  int lookup(const std::string& code) const;

  /// Position of `code`; throws ValidationError naming the code when absent.
  int require(const std::string& code) const;

  const std::string& code(int index) const;

  /// FNV-1a 64-bit digest over the codes joined with '\n'.
  std::uint64_t digest() const;

 private:
  Kind kind_ = Kind::kSymptom;
  std::vector<std::string> codes_;
  std::vector<std::string> descriptions_;
  std::unordered_map<std::string, int> index_;
};

/// Reads a vocabulary file: one code per line, optional tab-separated
/// description. Throws ParseError (I/O, duplicate code) with line numbers.
Vocabulary load_vocabulary(const std::string& path, Kind kind);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);

/// The four vocabularies a corpus carries.
struct VocabSet {
  Vocabulary symptom;
  Vocabulary diagnosis;
  Vocabulary medication;
  Vocabulary word;

  const Vocabulary& of(Kind kind) const;
};

/// Reserved word-vocabulary tokens, always at the front in this order.
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kBosToken = "<bos>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kEmptyToken = "<empty>";

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace msic::data
