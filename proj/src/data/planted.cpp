#include "msic/data/planted.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "msic/core/rng.hpp"

namespace msic::data {

namespace {

constexpr std::array<const char*, 6> kSymptomAdjectives = {
    "dull", "sharp", "mild", "burning", "throbbing", "itchy"};
constexpr std::array<const char*, 8> kSymptomNouns = {
    "head", "chest", "back", "joint", "throat", "skin", "stomach", "limb"};
constexpr std::array<const char*, 8> kDiagnosisAdjectives = {
    "acute", "chronic", "viral", "early", "severe", "latent", "stable",
    "recurrent"};
constexpr std::array<const char*, 6> kDiagnosisNouns = {
    "anemia", "infection", "migraine", "arthritis", "gastritis", "dermatitis"};
constexpr std::array<const char*, 4> kMedicationSchedules = {"daily", "nightly",
                                                             "weekly", "oral"};
constexpr std::array<const char*, 5> kMedicationForms = {
    "tonic", "tablet", "capsule", "syrup", "ointment"};
constexpr std::array<const char*, 12> kGlueWords = {
    "patient", "reports",  "no",   "complaints", "assessment", "finds",
    "new",     "conditions", "plan", "includes",   "medication", "and"};

std::string padded_code(char prefix, int index) {
  std::string digits = std::to_string(index);
  while (digits.size() < 2) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

/// Solves the truncated-geometric success parameter so that the mean visit
/// count matches the target; distribution P(T=k) proportional to q^(k-min).
std::vector<double> visit_count_distribution(int min_v, int max_v,
                                             double mean) {
  const int n = max_v - min_v + 1;
  std::vector<double> probs(static_cast<std::size_t>(n));
  if (n == 1) {
    probs[0] = 1.0;
    return probs;
  }
  auto mean_for = [&](double q) {
    double num = 0.0;
    double den = 0.0;
    double w = 1.0;
    for (int k = min_v; k <= max_v; ++k) {
      num += k * w;
      den += w;
      w *= q;
    }
    return num / den;
  };
  double lo = 1e-12;
  double hi = 1.0 - 1e-12;
  const double target =
      std::min(std::max(mean, static_cast<double>(min_v) + 1e-9),
               mean_for(hi));
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_for(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double q = 0.5 * (lo + hi);
  double w = 1.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    probs[static_cast<std::size_t>(i)] = w;
    total += w;
    w *= q;
  }
  for (auto& p : probs) p /= total;
  return probs;
}

int sample_from(const std::vector<double>& probs, msic::Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::vector<int> sample_distinct(int count, int limit, msic::Rng& rng) {
  std::set<int> chosen;
  const int want = std::min(count, limit);
  while (static_cast<int>(chosen.size()) < want) {
    chosen.insert(static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(limit))));
  }
  return std::vector<int>(chosen.begin(), chosen.end());
}

std::vector<std::string> render_paragraph(
    Kind kind, const std::vector<int>& indices,
    const std::vector<std::string>& lead,
    const std::vector<std::string>& empty_tail) {
  std::vector<std::string> tokens = lead;
  if (indices.empty()) {
    tokens.insert(tokens.end(), empty_tail.begin(), empty_tail.end());
    return tokens;
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i != 0) tokens.push_back("and");
    const auto phrase = planted_phrase(kind, indices[i]);
    tokens.insert(tokens.end(), phrase.begin(), phrase.end());
  }
  return tokens;
}

Report render_report(const Visit& visit) {
  Report report;
  report.chief_complaint =
      render_paragraph(Kind::kSymptom, visit.symptoms.indices,
                       {"patient", "reports"}, {"no", "complaints"});
  report.present_illness =
      render_paragraph(Kind::kDiagnosis, visit.diagnoses.indices,
                       {"assessment", "finds"}, {"no", "new", "conditions"});
  report.prescription =
      render_paragraph(Kind::kMedication, visit.medications.indices,
                       {"plan", "includes"}, {"no", "medication"});
  return report;
}

}  // namespace

void PlantedConfig::default_rules() {
  sym_to_diag.clear();
  diag_to_med.clear();
  diag_to_next_sym.clear();
  for (int i = 0; i < symptom_vocab; ++i) {
    sym_to_diag.emplace_back(i, i % diagnosis_vocab);
  }
  for (int j = 0; j < diagnosis_vocab; ++j) {
    diag_to_med.emplace_back(j, j % medication_vocab);
    diag_to_next_sym.emplace_back(j, (j + 3) % symptom_vocab);
  }
}

void PlantedConfig::validate() const {
  if (symptom_vocab < 1 || diagnosis_vocab < 1 || medication_vocab < 1) {
    throw ConfigError("planted corpus: vocabulary sizes must be positive");
  }
  if (patients < 1) throw ConfigError("planted corpus: patients must be >= 1");
  if (min_visits < 1 || max_visits < min_visits) {
    throw ConfigError("planted corpus: need 1 <= min_visits <= max_visits");
  }
  if (mean_visits < min_visits || mean_visits > max_visits) {
    throw ConfigError(
        "planted corpus: mean_visits outside [min_visits, max_visits]");
  }
  for (double p : {noise, extra_rate, progression_prob}) {
    if (p < 0.0 || p > 1.0) {
      throw ConfigError("planted corpus: probabilities must lie in [0, 1]");
    }
  }
  if (base_symptoms_min < 1 || base_symptoms_max < base_symptoms_min) {
    throw ConfigError(
        "planted corpus: need 1 <= base_symptoms_min <= base_symptoms_max");
  }
  auto check_rules = [](const std::vector<std::pair<int, int>>& rules,
                        int from_size, int to_size, const char* name) {
    for (const auto& [from, to] : rules) {
      if (from < 0 || from >= from_size || to < 0 || to >= to_size) {
        throw ConfigError(std::string("planted corpus: rule ") + name + " (" +
                          std::to_string(from) + " -> " + std::to_string(to) +
                          ") references an out-of-range code");
      }
    }
  };
  check_rules(sym_to_diag, symptom_vocab, diagnosis_vocab, "sym_to_diag");
  check_rules(diag_to_med, diagnosis_vocab, medication_vocab, "diag_to_med");
  check_rules(diag_to_next_sym, diagnosis_vocab, symptom_vocab,
              "diag_to_next_sym");
}

Vocabulary planted_vocabulary(Kind kind, int size) {
  char prefix = 'S';
  if (kind == Kind::kDiagnosis) prefix = 'D';
  if (kind == Kind::kMedication) prefix = 'M';
  std::vector<std::string> codes;
  codes.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) codes.push_back(padded_code(prefix, i));
  return Vocabulary(kind, std::move(codes));
}

Vocabulary planted_word_vocabulary() {
  std::vector<std::string> words = {kPadToken, kBosToken, kEosToken, kUnkToken,
                                    kEmptyToken};
  auto add_bank = [&words](const auto& bank) {
    for (const char* w : bank) {
      if (std::find(words.begin(), words.end(), w) == words.end()) {
        words.emplace_back(w);
      }
    }
  };
  add_bank(kGlueWords);
  add_bank(kSymptomAdjectives);
  add_bank(kSymptomNouns);
  add_bank(kDiagnosisAdjectives);
  add_bank(kDiagnosisNouns);
  add_bank(kMedicationSchedules);
  add_bank(kMedicationForms);
  return Vocabulary(Kind::kWord, std::move(words));
}

std::vector<std::string> planted_phrase(Kind kind, int index) {
  switch (kind) {
    case Kind::kSymptom:
      return {kSymptomAdjectives[static_cast<std::size_t>(
                  index % static_cast<int>(kSymptomAdjectives.size()))],
              kSymptomNouns[static_cast<std::size_t>(
                  (index / static_cast<int>(kSymptomAdjectives.size())) %
                  static_cast<int>(kSymptomNouns.size()))]};
    case Kind::kDiagnosis:
      return {kDiagnosisAdjectives[static_cast<std::size_t>(
                  index % static_cast<int>(kDiagnosisAdjectives.size()))],
              kDiagnosisNouns[static_cast<std::size_t>(
                  (index / static_cast<int>(kDiagnosisAdjectives.size())) %
                  static_cast<int>(kDiagnosisNouns.size()))]};
    case Kind::kMedication:
      return {kMedicationSchedules[static_cast<std::size_t>(
                  index % static_cast<int>(kMedicationSchedules.size()))],
              kMedicationForms[static_cast<std::size_t>(
                  (index / static_cast<int>(kMedicationSchedules.size())) %
                  static_cast<int>(kMedicationForms.size()))]};
    default:
      throw ValidationError("planted phrases exist only for event kinds");
  }
}

Corpus generate_planted_corpus(const PlantedConfig& config,
                               std::uint64_t seed) {
  PlantedConfig cfg = config;
  if (cfg.sym_to_diag.empty() && cfg.diag_to_med.empty() &&
      cfg.diag_to_next_sym.empty()) {
    cfg.default_rules();
  }
  cfg.validate();

  Corpus corpus;
  corpus.vocabs.symptom =
      planted_vocabulary(Kind::kSymptom, cfg.symptom_vocab);
  corpus.vocabs.diagnosis =
      planted_vocabulary(Kind::kDiagnosis, cfg.diagnosis_vocab);
  corpus.vocabs.medication =
      planted_vocabulary(Kind::kMedication, cfg.medication_vocab);
  corpus.vocabs.word = planted_word_vocabulary();

  const std::vector<double> visit_probs = visit_count_distribution(
      cfg.min_visits, cfg.max_visits, cfg.mean_visits);

  msic::Rng master(seed);
  for (int p = 0; p < cfg.patients; ++p) {
    msic::Rng rng = master.fork(static_cast<std::uint64_t>(p));
    PatientRecord record;
    record.patient_id = "P" + [](int idx) {
      std::string s = std::to_string(idx);
      while (s.size() < 4) s.insert(s.begin(), '0');
      return s;
    }(p);

    const int visits = cfg.min_visits + sample_from(visit_probs, rng);
    std::vector<int> prev_diagnoses;
    for (int t = 0; t < visits; ++t) {
      Visit visit;
      // Symptoms: progression from the previous visit's diagnoses plus fresh
      // base symptoms.
      std::set<int> symptoms;
      for (int diag : prev_diagnoses) {
        for (const auto& [from, to] : cfg.diag_to_next_sym) {
          if (from == diag && rng.bernoulli(cfg.progression_prob)) {
            symptoms.insert(to);
          }
        }
      }
      const int fresh =
          cfg.base_symptoms_min +
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(
              cfg.base_symptoms_max - cfg.base_symptoms_min + 1)));
      for (int s : sample_distinct(fresh, cfg.symptom_vocab, rng)) {
        symptoms.insert(s);
      }
      if (symptoms.empty()) {
        symptoms.insert(static_cast<int>(
            rng.uniform_int(static_cast<std::uint64_t>(cfg.symptom_vocab))));
      }
      visit.symptoms = EventSet::from_indices(
          Kind::kSymptom, {symptoms.begin(), symptoms.end()},
          cfg.symptom_vocab);

      // Diagnoses implied by this visit's symptoms, minus noise dropouts.
      std::set<int> diagnoses;
      for (int sym : visit.symptoms.indices) {
        for (const auto& [from, to] : cfg.sym_to_diag) {
          if (from == sym && !rng.bernoulli(cfg.noise)) diagnoses.insert(to);
        }
      }
      if (rng.bernoulli(cfg.extra_rate)) {
        diagnoses.insert(static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(cfg.diagnosis_vocab))));
      }
      visit.diagnoses = EventSet::from_indices(
          Kind::kDiagnosis, {diagnoses.begin(), diagnoses.end()},
          cfg.diagnosis_vocab);

      // Medications implied by the diagnoses.
      std::set<int> medications;
      for (int diag : visit.diagnoses.indices) {
        for (const auto& [from, to] : cfg.diag_to_med) {
          if (from == diag && !rng.bernoulli(cfg.noise)) medications.insert(to);
        }
      }
      if (rng.bernoulli(cfg.extra_rate)) {
        medications.insert(static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(cfg.medication_vocab))));
      }
      visit.medications = EventSet::from_indices(
          Kind::kMedication, {medications.begin(), medications.end()},
          cfg.medication_vocab);

      if (cfg.with_reports) visit.report = render_report(visit);
      prev_diagnoses = visit.diagnoses.indices;
      record.visits.push_back(std::move(visit));
    }
    corpus.records.push_back(std::move(record));
  }
  return corpus;
}

}  // namespace msic::data
