#include "msic/data/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace msic::data {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> parse_paragraph(const json& value,
                                         const Vocabulary& words) {
  std::vector<std::string> tokens = tokenize(value.get<std::string>());
  for (auto& token : tokens) {
    if (words.lookup(token) < 0) token = kUnkToken;
  }
  return tokens;
}

EventSet parse_event_array(const json& array, Kind kind,
                           const Vocabulary& vocab) {
  std::vector<int> indices;
  indices.reserve(array.size());
  for (const auto& code : array) {
    indices.push_back(vocab.require(code.get<std::string>()));
  }
  return EventSet::from_indices(kind, std::move(indices), vocab.size());
}

json event_array(const EventSet& set, const Vocabulary& vocab) {
  json array = json::array();
  for (int idx : set.indices) array.push_back(vocab.code(idx));
  return array;
}

}  // namespace

EventSet EventSet::from_indices(Kind kind, std::vector<int> indices,
                                int vocab_size) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  for (int idx : indices) {
    if (idx < 0 || idx >= vocab_size) {
      throw ValidationError("event index " + std::to_string(idx) +
                            " out of range for " + kind_name(kind) +
                            " vocabulary of size " +
                            std::to_string(vocab_size));
    }
  }
  return EventSet{kind, std::move(indices)};
}

bool EventSet::contains(int index) const {
  return std::binary_search(indices.begin(), indices.end(), index);
}

const std::vector<std::string>& Report::paragraph(Kind kind) const {
  switch (kind) {
    case Kind::kSymptom:
      return chief_complaint;
    case Kind::kDiagnosis:
      return present_illness;
    case Kind::kMedication:
      return prescription;
    default:
      throw ValidationError("report paragraph requires an event kind");
  }
}

const EventSet& Visit::events(Kind kind) const {
  switch (kind) {
    case Kind::kSymptom:
      return symptoms;
    case Kind::kDiagnosis:
      return diagnoses;
    case Kind::kMedication:
      return medications;
    default:
      throw ValidationError("visit events require an event kind");
  }
}

EventSet& Visit::events(Kind kind) {
  return const_cast<EventSet&>(
      static_cast<const Visit&>(*this).events(kind));
}

std::size_t Corpus::visit_count() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.visits.size();
  return n;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        tokens.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i != 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<int> to_word_ids(const std::vector<std::string>& tokens,
                             const Vocabulary& words) {
  const int unk = words.require(kUnkToken);
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) {
    int id = words.lookup(token);
    ids.push_back(id < 0 ? unk : id);
  }
  return ids;
}

std::vector<std::string> to_word_strings(const std::vector<int>& ids,
                                         const Vocabulary& words) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) tokens.push_back(words.code(id));
  return tokens;
}

Corpus parse_corpus(const std::string& path, const VocabSet& vocabs) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.vocabs = vocabs;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed record: " + e.what());
    }
    try {
      PatientRecord patient;
      patient.patient_id = record.at("patient_id").get<std::string>();
      if (!seen_ids.insert(patient.patient_id).second) {
        throw ValidationError("duplicate patient_id \"" + patient.patient_id +
                              "\"");
      }
      const json& visits = record.at("visits");
      if (!visits.is_array() || visits.empty()) {
        throw ValidationError("patient \"" + patient.patient_id +
                              "\" has no visits");
      }
      for (const auto& v : visits) {
        Visit visit;
        visit.symptoms = parse_event_array(v.at("symptoms"), Kind::kSymptom,
                                           vocabs.symptom);
        visit.diagnoses = parse_event_array(v.at("diagnoses"),
                                            Kind::kDiagnosis, vocabs.diagnosis);
        visit.medications = parse_event_array(
            v.at("medications"), Kind::kMedication, vocabs.medication);
        if (v.contains("report") && !v.at("report").is_null()) {
          const json& rep = v.at("report");
          Report report;
          report.chief_complaint =
              parse_paragraph(rep.at("chief_complaint"), vocabs.word);
          report.present_illness =
              parse_paragraph(rep.at("present_illness"), vocabs.word);
          report.prescription =
              parse_paragraph(rep.at("prescription"), vocabs.word);
          visit.report = std::move(report);
        }
        patient.visits.push_back(std::move(visit));
      }
      corpus.records.push_back(std::move(patient));
    } catch (const ValidationError&) {
      throw;
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed record: " + e.what());
    }
  }
  return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& patient : corpus.records) {
    ordered_json record;
    record["patient_id"] = patient.patient_id;
    ordered_json visits = ordered_json::array();
    for (const auto& visit : patient.visits) {
      ordered_json v;
      v["symptoms"] = event_array(visit.symptoms, corpus.vocabs.symptom);
      v["diagnoses"] = event_array(visit.diagnoses, corpus.vocabs.diagnosis);
      v["medications"] =
          event_array(visit.medications, corpus.vocabs.medication);
      if (visit.report.has_value()) {
        ordered_json rep;
        rep["chief_complaint"] = join_tokens(visit.report->chief_complaint);
        rep["present_illness"] = join_tokens(visit.report->present_illness);
        rep["prescription"] = join_tokens(visit.report->prescription);
        v["report"] = std::move(rep);
      }
      visits.push_back(std::move(v));
    }
    record["visits"] = std::move(visits);
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw ParseError("cannot write corpus file: " + path);
  out << serialize_corpus(corpus);
}

}  // namespace msic::data
