#include "msic/data/vocab.hpp"

#include <fstream>

namespace msic::data {

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::kSymptom:
      return "symptom";
    case Kind::kDiagnosis:
      return "diagnosis";
    case Kind::kMedication:
      return "medication";
    case Kind::kWord:
      return "word";
  }
  return "unknown";
}

Kind kind_from_name(const std::string& name) {
  if (name == "symptom") return Kind::kSymptom;
  if (name == "diagnosis") return Kind::kDiagnosis;
  if (name == "medication") return Kind::kMedication;
  if (name == "word") return Kind::kWord;
  throw ValidationError("unknown event kind: " + name);
}

Vocabulary::Vocabulary(Kind kind, std::vector<std::string> codes,
                       std::vector<std::string> descriptions)
    : kind_(kind),
      codes_(std::move(codes)),
      descriptions_(std::move(descriptions)) {
  if (!descriptions_.empty() && descriptions_.size() != codes_.size()) {
    throw ValidationError("vocabulary descriptions do not align with codes");
  }
  index_.reserve(codes_.size());
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (!index_.emplace(codes_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocabulary code: " + codes_[i]);
    }
  }
}

int Vocabulary::lookup(const std::string& code) const {
  auto it = index_.find(code);
  return it == index_.end() ? -1 : it->second;
}

int Vocabulary::require(const std::string& code) const {
  const int idx = lookup(code);
  if (idx < 0) {
    throw ValidationError("code \"" + code + "\" not in " +
                          kind_name(kind_) + " vocabulary");
  }
  return idx;
}

const std::string& Vocabulary::code(int index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("vocabulary index out of range: " +
                          std::to_string(index));
  }
  return codes_[static_cast<std::size_t>(index)];
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t Vocabulary::digest() const {
  std::string joined;
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (i != 0) joined += '\n';
    joined += codes_[i];
  }
  return fnv1a64(joined);
}

Vocabulary load_vocabulary(const std::string& path, Kind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary file: " + path);
  std::vector<std::string> codes;
  std::vector<std::string> descriptions;
  std::string line;
  std::size_t line_no = 0;
  bool any_description = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::string code = tab == std::string::npos ? line : line.substr(0, tab);
    std::string desc = tab == std::string::npos ? "" : line.substr(tab + 1);
    if (code.empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": empty code before tab");
    }
    codes.push_back(std::move(code));
    descriptions.push_back(std::move(desc));
    any_description = any_description || !descriptions.back().empty();
  }
  try {
    return Vocabulary(kind, std::move(codes),
                      any_description ? std::move(descriptions)
                                      : std::vector<std::string>{});
  } catch (const ValidationError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write vocabulary file: " + path);
  const auto& descs = vocab.descriptions();
  for (int i = 0; i < vocab.size(); ++i) {
    out << vocab.code(i);
    if (!descs.empty() && !descs[static_cast<std::size_t>(i)].empty()) {
      out << '\t' << descs[static_cast<std::size_t>(i)];
    }
    out << '\n';
  }
}

const Vocabulary& VocabSet::of(Kind kind) const {
  switch (kind) {
    case Kind::kSymptom:
      return symptom;
    case Kind::kDiagnosis:
      return diagnosis;
    case Kind::kMedication:
      return medication;
    case Kind::kWord:
      return word;
  }
  throw ValidationError("invalid kind");
}

}  // namespace msic::data
