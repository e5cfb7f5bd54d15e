#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "msic/core/rng.hpp"
#include "msic/data/planted.hpp"
#include "msic/data/split.hpp"
#include "msic/privacy/attacks.hpp"

using namespace msic;

namespace {

std::vector<std::string> symptom_codes(int n) {
  std::vector<std::string> codes;
  for (int i = 0; i < n; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "S%02d", i);
    codes.emplace_back(buf);
  }
  return codes;
}

/// Corpus over a symptom-only vocabulary: each record is one visit whose
/// symptom set is given directly as indices.
data::Corpus symptom_corpus(int vocab,
                            const std::vector<std::vector<int>>& records,
                            const std::string& id_prefix) {
  data::Corpus corpus;
  corpus.vocabs.symptom =
      data::Vocabulary(data::Kind::kSymptom, symptom_codes(vocab));
  corpus.vocabs.diagnosis = data::Vocabulary(data::Kind::kDiagnosis, {});
  corpus.vocabs.medication = data::Vocabulary(data::Kind::kMedication, {});
  corpus.vocabs.word = data::planted_word_vocabulary();
  for (std::size_t i = 0; i < records.size(); ++i) {
    data::PatientRecord rec;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%03zu", id_prefix.c_str(), i);
    rec.patient_id = buf;
    data::Visit visit;
    visit.symptoms =
        data::EventSet::from_indices(data::Kind::kSymptom, records[i], vocab);
    visit.diagnoses =
        data::EventSet::from_indices(data::Kind::kDiagnosis, {}, 0);
    visit.medications =
        data::EventSet::from_indices(data::Kind::kMedication, {}, 0);
    rec.visits.push_back(std::move(visit));
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

privacy::FlatRecord flat_of(const std::set<std::pair<int, int>>& items) {
  privacy::FlatRecord r;
  r.items = items;
  return r;
}

}  // namespace

TEST_CASE("jaccard distance fixtures") {
  auto a = flat_of({{0, 1}, {0, 2}});
  auto b = flat_of({{0, 2}, {0, 3}});
  CHECK(privacy::jaccard_distance(a, a) == 0.0);
  CHECK(privacy::jaccard_distance(a, b) == doctest::Approx(2.0 / 3.0));
  auto disjoint = flat_of({{1, 0}, {2, 5}});
  CHECK(privacy::jaccard_distance(a, disjoint) == 1.0);
  auto empty = flat_of({});
  CHECK(privacy::jaccard_distance(empty, empty) == 0.0);
  CHECK(privacy::jaccard_distance(a, empty) == 1.0);
}

TEST_CASE("jaccard distance is a metric on random sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::set<std::pair<int, int>> sets[3];
    for (auto& s : sets) {
      for (int kind = 0; kind < 3; ++kind) {
        for (int code = 0; code < 6; ++code) {
          if (rng.bernoulli(0.4)) s.emplace(kind, code);
        }
      }
    }
    auto a = flat_of(sets[0]);
    auto b = flat_of(sets[1]);
    auto c = flat_of(sets[2]);
    const double ab = privacy::jaccard_distance(a, b);
    const double bc = privacy::jaccard_distance(b, c);
    const double ac = privacy::jaccard_distance(a, c);
    CHECK(ab == privacy::jaccard_distance(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("flatten pools events across visits and deduplicates") {
  data::Corpus corpus = symptom_corpus(6, {{0, 2}}, "P");
  data::Visit second;
  second.symptoms =
      data::EventSet::from_indices(data::Kind::kSymptom, {2, 4}, 6);
  second.diagnoses = data::EventSet::from_indices(data::Kind::kDiagnosis, {}, 0);
  second.medications =
      data::EventSet::from_indices(data::Kind::kMedication, {}, 0);
  corpus.records[0].visits.push_back(second);

  privacy::FlatRecord flat = privacy::flatten(corpus.records[0]);
  CHECK(flat.patient_id == "P000");
  CHECK(flat.items ==
        std::set<std::pair<int, int>>{{0, 0}, {0, 2}, {0, 4}});
}

TEST_CASE("membership attack: copy synthesizer with a fixed threshold") {
  data::Corpus train =
      symptom_corpus(10, {{0, 1}, {2, 3}, {4, 5}, {6, 7}}, "TR");
  data::Corpus synthetic =
      symptom_corpus(10, {{4, 5}, {0, 1}, {6, 7}, {2, 3}}, "SY");
  data::Corpus test =
      symptom_corpus(10, {{0, 8}, {2, 9}, {4, 8, 9}, {1, 3}}, "TE");

  privacy::MembershipConfig cfg;
  cfg.sample_per_side = 4;
  cfg.fixed_tau = 0.0;
  privacy::MembershipResult r =
      privacy::membership_attack(train, test, synthetic, cfg, 1);
  CHECK(r.tau == 0.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.eval_members == 4);
  CHECK(r.eval_nonmembers == 4);
}

TEST_CASE("membership attack: calibrated threshold on a planted corpus") {
  data::PlantedConfig pc;
  pc.symptom_vocab = 12;
  pc.diagnosis_vocab = 10;
  pc.medication_vocab = 8;
  pc.patients = 60;
  pc.mean_visits = 2.5;
  pc.with_reports = false;
  pc.default_rules();
  data::Corpus corpus = data::generate_planted_corpus(pc, 42);
  data::SplitResult split =
      data::split_corpus(corpus, {0.5, 0.25, 0.25}, 7);

  privacy::MembershipConfig cfg;
  cfg.sample_per_side = 15;
  cfg.calibration_fraction = 0.2;
  privacy::MembershipResult r = privacy::membership_attack(
      split.train, split.test, split.train /* copies */, cfg, 3);
  CHECK(r.accuracy >= 0.85);
  CHECK(r.eval_members + r.eval_nonmembers == 24);

  SUBCASE("deterministic for a fixed seed") {
    privacy::MembershipResult r2 = privacy::membership_attack(
        split.train, split.test, split.train, cfg, 3);
    CHECK(r2.tau == r.tau);
    CHECK(r2.accuracy == r.accuracy);
    CHECK(r2.precision == r.precision);
    CHECK(r2.recall == r.recall);
    CHECK(r2.f1 == r.f1);
  }

  SUBCASE("synthetic record order does not matter") {
    data::Corpus reversed = split.train;
    std::reverse(reversed.records.begin(), reversed.records.end());
    // A duplicated record cannot change any nearest distance either.
    reversed.records.push_back(reversed.records.front());
    privacy::MembershipResult r3 =
        privacy::membership_attack(split.train, split.test, reversed, cfg, 3);
    CHECK(r3.tau == r.tau);
    CHECK(r3.accuracy == r.accuracy);
  }
}

TEST_CASE("membership attack validation") {
  data::Corpus train = symptom_corpus(6, {{0}, {1}}, "TR");
  data::Corpus test = symptom_corpus(6, {{2}, {3}}, "TE");
  data::Corpus synthetic = symptom_corpus(6, {{0}, {4}}, "SY");

  privacy::MembershipConfig cfg;
  cfg.sample_per_side = 0;
  CHECK_THROWS_AS(privacy::membership_attack(train, test, synthetic, cfg, 1),
                  ConfigError);
  cfg = privacy::MembershipConfig{};
  cfg.calibration_fraction = 1.0;
  CHECK_THROWS_AS(privacy::membership_attack(train, test, synthetic, cfg, 1),
                  ConfigError);
  cfg = privacy::MembershipConfig{};
  cfg.fixed_tau = 1.5;
  CHECK_THROWS_AS(privacy::membership_attack(train, test, synthetic, cfg, 1),
                  ConfigError);
  cfg = privacy::MembershipConfig{};
  data::Corpus empty;
  CHECK_THROWS_AS(privacy::membership_attack(empty, test, synthetic, cfg, 1),
                  ValidationError);
  CHECK_THROWS_AS(privacy::membership_attack(train, test, empty, cfg, 1),
                  ValidationError);
}

TEST_CASE("attribute attack: hand-computed two-probe fixture") {
  // Four symptom codes; every code appears in exactly one train record,
  // so the frequency ranking falls back to canonical order and the
  // common half is {S00, S01}.
  data::Corpus train = symptom_corpus(4, {{0, 2}, {1, 3}}, "TR");
  data::Corpus synthetic = symptom_corpus(4, {{0, 2}, {1}}, "SY");
  data::Corpus test = symptom_corpus(4, {{0, 3}, {1, 3}}, "TE");

  privacy::AttributeConfig cfg;
  cfg.common_fraction = 0.5;
  privacy::AttributeResult r =
      privacy::attribute_attack(train, test, synthetic, cfg, 1);
  CHECK(r.common_codes == 2);
  CHECK(r.sensitive_codes == 2);
  // Probe {0,2}: neighbor SY000 predicts {2} (hit). Probe {1,3}:
  // neighbor SY001 predicts nothing, missing {3}. tp=1, fp=0, fn=1.
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // Against the test pool both probes find their code-sharing record;
  // the first prediction {3} is wrong, the second right. tp=1 fp=1 fn=1.
  CHECK(r.baseline_f1 == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("the seed parameter has no effect") {
    privacy::AttributeResult r2 =
        privacy::attribute_attack(train, test, synthetic, cfg, 999);
    CHECK(r2.f1 == r.f1);
    CHECK(r2.baseline_f1 == r.baseline_f1);
  }
}

TEST_CASE("attribute attack: copy synthesizer recovers everything") {
  // Each record holds one unique common code and one unique sensitive
  // code, so its nearest neighbor in a copied pool is itself and every
  // sensitive prediction is exact.
  std::vector<std::vector<int>> records;
  for (int i = 0; i < 6; ++i) records.push_back({i, 6 + i});
  data::Corpus train = symptom_corpus(12, records, "TR");
  data::Corpus synthetic = symptom_corpus(12, records, "SY");
  std::vector<std::vector<int>> test_records;
  for (int i = 0; i < 6; ++i) test_records.push_back({i, 6 + (i + 1) % 6});
  data::Corpus test = symptom_corpus(12, test_records, "TE");

  privacy::AttributeConfig cfg;
  cfg.common_fraction = 0.5;
  privacy::AttributeResult r =
      privacy::attribute_attack(train, test, synthetic, cfg, 1);
  CHECK(r.common_codes == 6);
  CHECK(r.sensitive_codes == 6);
  CHECK(r.f1 == 1.0);
  // The shifted test pool pairs each probe with a record whose
  // sensitive code is always wrong.
  CHECK(r.baseline_f1 == 0.0);
}

TEST_CASE("attribute attack on planted data: copies beat a real holdout") {
  data::PlantedConfig pc;
  pc.symptom_vocab = 12;
  pc.diagnosis_vocab = 10;
  pc.medication_vocab = 8;
  pc.patients = 50;
  pc.mean_visits = 2.5;
  pc.with_reports = false;
  pc.default_rules();
  data::Corpus corpus = data::generate_planted_corpus(pc, 17);
  data::SplitResult split = data::split_corpus(corpus, {0.6, 0.2, 0.2}, 7);

  privacy::AttributeConfig cfg;
  cfg.common_fraction = 0.5;
  privacy::AttributeResult r =
      privacy::attribute_attack(split.train, split.test, split.train, cfg, 1);
  CHECK(r.f1 >= 0.9);
  CHECK(r.f1 <= 1.0);
  CHECK(r.baseline_f1 <= r.f1);
}

TEST_CASE("attribute attack validation") {
  data::Corpus train = symptom_corpus(4, {{0, 2}, {1, 3}}, "TR");
  data::Corpus synthetic = symptom_corpus(4, {{0, 2}}, "SY");
  data::Corpus test = symptom_corpus(4, {{0, 3}}, "TE");

  privacy::AttributeConfig cfg;
  cfg.common_fraction = 0.0;
  CHECK_THROWS_AS(privacy::attribute_attack(train, test, synthetic, cfg, 1),
                  ConfigError);
  cfg.common_fraction = 1.0;
  CHECK_THROWS_AS(privacy::attribute_attack(train, test, synthetic, cfg, 1),
                  ConfigError);
  // floor(0.2 * 4) = 0 common codes: degenerate split.
  cfg.common_fraction = 0.2;
  CHECK_THROWS_AS(privacy::attribute_attack(train, test, synthetic, cfg, 1),
                  ParameterError);
  cfg = privacy::AttributeConfig{};
  data::Corpus empty;
  CHECK_THROWS_AS(privacy::attribute_attack(empty, test, synthetic, cfg, 1),
                  ValidationError);
}
