#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "msic/data/planted.hpp"
#include "msic/train/checkpoint.hpp"
#include "msic/model/model.hpp"
#include "msic/model/synthesis.hpp"
#include "msic/train/losses.hpp"
#include "msic/train/trainer.hpp"

using namespace msic;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig cfg;
  cfg.hidden_dim = 16;
  cfg.latent_dim = 8;
  cfg.encoder_layers = 1;
  cfg.encoder_heads = 2;
  cfg.decoder_layers = 1;
  cfg.decoder_heads = 2;
  cfg.ff_multiplier = 2;
  cfg.max_visits = 6;
  cfg.max_report_len = 8;
  return cfg;
}

data::PlantedConfig tiny_planted() {
  data::PlantedConfig pc;
  pc.symptom_vocab = 6;
  pc.diagnosis_vocab = 5;
  pc.medication_vocab = 4;
  pc.patients = 8;
  pc.mean_visits = 2.5;
  pc.max_visits = 4;
  pc.default_rules();
  return pc;
}

data::VocabSet tiny_vocabs() {
  return data::VocabSet{
      data::planted_vocabulary(data::Kind::kSymptom, 6),
      data::planted_vocabulary(data::Kind::kDiagnosis, 5),
      data::planted_vocabulary(data::Kind::kMedication, 4),
      data::planted_word_vocabulary()};
}

template <typename M>
bool bits_equal(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

struct Snapshot {
  std::vector<std::string> names;
  std::vector<num::Mat<float>> values;
};

Snapshot snapshot_params(const model::MsicModel<float>& m,
                         const std::string& prefix = "") {
  Snapshot snap;
  for (const auto& e : m.params().entries()) {
    if (!prefix.empty() && e.name.rfind(prefix, 0) != 0) continue;
    snap.names.push_back(e.name);
    snap.values.push_back(e.var.value());
  }
  return snap;
}

bool snapshot_matches(const model::MsicModel<float>& m, const Snapshot& snap,
                      const std::string& prefix = "") {
  Snapshot now = snapshot_params(m, prefix);
  if (now.names != snap.names) return false;
  for (std::size_t i = 0; i < now.values.size(); ++i) {
    if (!bits_equal(now.values[i], snap.values[i])) return false;
  }
  return true;
}

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/msic_train_" + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double kl_closed_form(const std::vector<double>& mu_q,
                      const std::vector<double>& lv_q,
                      const std::vector<double>& mu_p,
                      const std::vector<double>& lv_p) {
  double kl = 0.0;
  for (std::size_t i = 0; i < mu_q.size(); ++i) {
    const double dm = mu_q[i] - mu_p[i];
    kl += 0.5 * (lv_p[i] - lv_q[i] +
                 (std::exp(lv_q[i]) + dm * dm) / std::exp(lv_p[i]) - 1.0);
  }
  return kl;
}

// Finds a record with at least two visits, all carrying reports.
const data::PatientRecord& multi_visit_record(const data::Corpus& corpus) {
  for (const auto& rec : corpus.records) {
    if (rec.visits.size() < 2) continue;
    bool all_reports = true;
    for (const auto& v : rec.visits) all_reports &= v.report.has_value();
    if (all_reports) return rec;
  }
  REQUIRE(false);
  return corpus.records.front();
}

}  // namespace

TEST_CASE("patient_loss total matches the per-visit re-sum") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 3);
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  const data::PatientRecord& rec = multi_visit_record(corpus);
  train::LossWeights w;  // defaults: all terms active

  Rng noise(77);
  train::PatientLoss<float> pl =
      train::patient_loss(m, rec, w, train::ReportMode::kTrain, noise);
  CHECK(pl.visits.size() == rec.visits.size());

  double resum = 0.0;
  for (const auto& v : pl.visits) resum += v.weighted_total(w);
  CHECK(static_cast<double>(pl.total.item()) ==
        doctest::Approx(resum).epsilon(1e-4));
  CHECK(std::isfinite(resum));
  CHECK(resum > 0.0);

  // Final visit never has next-visit terms; earlier ones always do.
  CHECK_FALSE(pl.visits.back().has_next);
  for (std::size_t t = 0; t + 1 < pl.visits.size(); ++t) {
    CHECK(pl.visits[t].has_next);
  }
  CHECK(pl.probe.present);
  CHECK(pl.probe.mu_q.size() == 8);
}

TEST_CASE("patient_loss with all-zero weights yields an exact zero total") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 3);
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  const data::PatientRecord& rec = multi_visit_record(corpus);
  train::LossWeights w;
  w.s = w.d = w.m = w.y_s = w.y_d = w.y_m = w.kl = 0.0;

  Rng noise(77);
  train::PatientLoss<float> pl =
      train::patient_loss(m, rec, w, train::ReportMode::kTrain, noise);
  CHECK(static_cast<double>(pl.total.item()) == 0.0);
  // Term values are still measured even when their weight is zero.
  CHECK(pl.visits.front().l_m > 0.0);
}

TEST_CASE("doubling one weight shifts the total by that term's sum") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 4);
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  const data::PatientRecord& rec = multi_visit_record(corpus);

  train::LossWeights w1;
  train::LossWeights w2 = w1;
  w2.m = 2.0;

  Rng noise_a(123);
  train::PatientLoss<float> a =
      train::patient_loss(m, rec, w1, train::ReportMode::kOff, noise_a);
  Rng noise_b(123);
  train::PatientLoss<float> b =
      train::patient_loss(m, rec, w2, train::ReportMode::kOff, noise_b);

  double sum_lm = 0.0;
  for (std::size_t t = 0; t < a.visits.size(); ++t) {
    // Identical noise sequence: the unweighted terms agree exactly.
    CHECK(a.visits[t].l_m == b.visits[t].l_m);
    sum_lm += a.visits[t].l_m;
  }
  const double da = static_cast<double>(a.total.item());
  const double db = static_cast<double>(b.total.item());
  CHECK(db - da == doctest::Approx(sum_lm).epsilon(1e-4));
}

TEST_CASE("report modes: telemetry measures without changing the total") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 5);
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  const data::PatientRecord& rec = multi_visit_record(corpus);
  train::LossWeights w;

  Rng r_off(55);
  train::PatientLoss<float> off =
      train::patient_loss(m, rec, w, train::ReportMode::kOff, r_off);
  Rng r_tel(55);
  train::PatientLoss<float> tel =
      train::patient_loss(m, rec, w, train::ReportMode::kTelemetry, r_tel);
  Rng r_trn(55);
  train::PatientLoss<float> trn =
      train::patient_loss(m, rec, w, train::ReportMode::kTrain, r_trn);

  // The report branch draws no randomness and contributes nothing to
  // the optimized total in telemetry mode: bitwise-equal totals.
  CHECK(off.total.item() == tel.total.item());
  CHECK_FALSE(off.visits.front().has_reports);
  CHECK(tel.visits.front().has_reports);
  CHECK(tel.visits.front().l_ys > 0.0);
  CHECK(tel.visits.front().l_ym > 0.0);

  // Training mode folds the (positive) report losses into the total.
  CHECK(static_cast<double>(trn.total.item()) >
        static_cast<double>(off.total.item()));
  // The measured report values agree between telemetry and train mode.
  CHECK(tel.visits.front().l_ys ==
        doctest::Approx(trn.visits.front().l_ys).epsilon(1e-5));
}

TEST_CASE("patient_loss rejects an empty record") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 3);
  data::PatientRecord rec;
  rec.patient_id = "EMPTY";
  train::LossWeights w;
  Rng noise(1);
  CHECK_THROWS_AS(
      train::patient_loss(m, rec, w, train::ReportMode::kOff, noise),
      ValidationError);
}

TEST_CASE("polish gradients do not reach the draft prompts") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 6);
  const model::ReportGeneration<float>& rg = m.reports();

  data::EventSet es =
      data::EventSet::from_indices(data::Kind::kSymptom, {0, 2}, 6);
  data::EventSet ed =
      data::EventSet::from_indices(data::Kind::kDiagnosis, {1}, 5);
  data::EventSet em =
      data::EventSet::from_indices(data::Kind::kMedication, {3}, 4);
  std::vector<num::Var<float>> hs = {
      m.state().encode_set(data::Kind::kSymptom, es)};
  std::vector<num::Var<float>> hd = {
      m.state().encode_set(data::Kind::kDiagnosis, ed)};
  std::vector<num::Var<float>> hm = {
      m.state().encode_set(data::Kind::kMedication, em)};
  model::ContextualReps<float> reps = m.state().contextual(hs, hd, hm);

  num::Mat<float> hval(1, 8);
  Rng hr(9);
  for (int i = 0; i < 8; ++i) {
    hval(0, i) = static_cast<float>(hr.normal());
  }
  num::Var<float> h = num::Var<float>::constant(hval);
  num::Var<float> hp = rg.project_state(h);

  std::vector<int> gold = {5, 6, 7};
  num::Var<float> draft_prompts =
      rg.draft_prompts(data::Kind::kSymptom, hp, reps);
  num::Var<float> draft_nll =
      rg.paragraph_nll(data::Kind::kSymptom, draft_prompts, gold);

  std::vector<int> draft_ids;
  {
    num::NoGradGuard guard;
    draft_ids = rg.decode_greedy(data::Kind::kSymptom, draft_prompts.value());
  }
  num::Var<float> enc = rg.encode_paragraph(draft_ids);
  num::Var<float> polish_prompts =
      rg.polish_prompts(data::Kind::kSymptom, hp, enc, enc, enc);
  num::Var<float> polish_nll =
      rg.paragraph_nll(data::Kind::kSymptom, polish_prompts, gold);

  m.params().zero_grad();
  polish_nll.backward();

  // The draft pathway is cut at the discrete token choice: neither the
  // draft prompt block nor the draft NLL observes any gradient.
  auto untouched = [](const num::Var<float>& v) {
    return v.grad().size() == 0 || v.grad().cwiseAbs().maxCoeff() == 0.0f;
  };
  CHECK(untouched(draft_prompts));
  CHECK(untouched(draft_nll));

  // The paragraph encoder and the state projection do receive gradient.
  auto prefix_grad_norm = [&](const std::string& prefix) {
    double norm = 0.0;
    for (const auto& e : m.params().entries()) {
      if (e.name.rfind(prefix, 0) != 0) continue;
      if (e.var.grad().size() == 0) continue;
      norm += static_cast<double>(e.var.grad().squaredNorm());
    }
    return norm;
  };
  CHECK(prefix_grad_norm("report.encoder") > 0.0);
  CHECK(prefix_grad_norm("report.h_proj") > 0.0);
  CHECK(prefix_grad_norm("report.dec.symptom") > 0.0);
}

TEST_CASE("trainer writes parseable telemetry and the loss declines") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 1);
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);

  train::TrainConfig cfg;
  cfg.epochs = 4;
  cfg.event_only_epochs = 1;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = 1;
  cfg.telemetry_reports = true;

  train::Trainer<float> trainer(m, cfg);
  std::ostringstream telemetry;
  std::vector<train::EpochSummary> summaries =
      trainer.fit(corpus, &telemetry);
  REQUIRE(summaries.size() == 4);

  // Telemetry: one JSONL line per epoch with the documented fields.
  std::istringstream lines(telemetry.str());
  std::string line;
  int epoch = 0;
  while (std::getline(lines, line)) {
    ++epoch;
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.at("epoch").get<int>() == epoch);
    const auto& s = summaries[static_cast<std::size_t>(epoch - 1)];
    CHECK(j.at("loss_total").get<double>() ==
          doctest::Approx(s.loss_total).epsilon(1e-12));
    CHECK(j.at("learning_rate").get<double>() == s.learning_rate);
    CHECK(j.at("grad_norm").get<double>() == s.grad_norm);
    REQUIRE(j.contains("loss_terms"));
    CHECK(j.at("loss_terms").contains("m"));
    CHECK(j.at("loss_terms").contains("kl"));
    // Report terms are measured from epoch 1 because telemetry mode is on.
    CHECK(j.at("loss_terms").contains("y_s"));
    REQUIRE(j.contains("kl_probe"));
    const auto& kp = j.at("kl_probe");
    auto mu_q = kp.at("mu_q").get<std::vector<double>>();
    auto lv_q = kp.at("lv_q").get<std::vector<double>>();
    auto mu_p = kp.at("mu_p").get<std::vector<double>>();
    auto lv_p = kp.at("lv_p").get<std::vector<double>>();
    REQUIRE(mu_q.size() == 8);
    REQUIRE(lv_q.size() == 8);
    REQUIRE(mu_p.size() == 8);
    REQUIRE(lv_p.size() == 8);
    const double logged = kp.at("kl").get<double>();
    const double recomputed = kl_closed_form(mu_q, lv_q, mu_p, lv_p);
    CHECK(std::abs(recomputed - logged) < 1e-4 + 1e-4 * std::abs(logged));
  }
  CHECK(epoch == 4);

  for (const auto& s : summaries) {
    CHECK(std::isfinite(s.loss_total));
    CHECK(s.learning_rate > 0.0);
    CHECK(s.grad_norm > 0.0);
  }
  CHECK(summaries.back().loss_total < summaries.front().loss_total);
}

TEST_CASE("training is deterministic down to checkpoint bytes") {
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);

  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.event_only_epochs = 1;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = 7;

  Settings settings;
  settings.model = tiny_config();
  settings.train = cfg;

  auto run = [&](const std::string& path) {
    model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
    train::Trainer<float> trainer(m, cfg);
    std::vector<train::EpochSummary> s = trainer.fit(corpus, nullptr);
    train::save_checkpoint(path, m, stats, settings);
    return s;
  };

  TempPath p1("ckpt_a.bin"), p2("ckpt_b.bin");
  std::vector<train::EpochSummary> s1 = run(p1.path);
  std::vector<train::EpochSummary> s2 = run(p2.path);

  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].loss_total == s2[i].loss_total);
    CHECK(s1[i].grad_norm == s2[i].grad_norm);
  }
  CHECK(file_bytes(p1.path) == file_bytes(p2.path));
}

TEST_CASE("event-only epochs leave every report parameter untouched") {
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);

  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.event_only_epochs = 2;  // the report branch never trains
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = 3;

  Snapshot event_after_tel;
  for (bool telemetry : {true, false}) {
    cfg.telemetry_reports = telemetry;
    model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
    Snapshot report_before = snapshot_params(m, "report.");
    train::Trainer<float> trainer(m, cfg);
    trainer.fit(corpus, nullptr);
    CHECK(snapshot_matches(m, report_before, "report."));
    // The event-side parameters must evolve identically whether or not
    // the report terms are being measured for telemetry.
    Snapshot event_now = snapshot_params(m, "state.");
    if (telemetry) {
      event_after_tel = event_now;
    } else {
      REQUIRE(event_now.names == event_after_tel.names);
      for (std::size_t i = 0; i < event_now.values.size(); ++i) {
        CHECK(bits_equal(event_now.values[i], event_after_tel.values[i]));
      }
    }
  }
}

TEST_CASE("paragraph encoder freezes after its warm-up epochs") {
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);

  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.event_only_epochs = 1;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = 3;

  SUBCASE("zero warm-up keeps the encoder at initialization") {
    cfg.encoder_warmup_epochs = 0;
    model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
    Snapshot enc_before = snapshot_params(m, "report.encoder");
    Snapshot dec_before = snapshot_params(m, "report.dec.");
    train::Trainer<float> trainer(m, cfg);
    trainer.fit(corpus, nullptr);
    CHECK(snapshot_matches(m, enc_before, "report.encoder"));
    CHECK_FALSE(snapshot_matches(m, dec_before, "report.dec."));
  }

  SUBCASE("with one warm-up epoch the encoder trains") {
    cfg.encoder_warmup_epochs = 1;
    model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
    Snapshot enc_before = snapshot_params(m, "report.encoder");
    train::Trainer<float> trainer(m, cfg);
    trainer.fit(corpus, nullptr);
    CHECK_FALSE(snapshot_matches(m, enc_before, "report.encoder"));
  }
}

TEST_CASE("zero epochs returns immediately with parameters intact") {
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
  Snapshot before = snapshot_params(m);

  train::TrainConfig cfg;
  cfg.epochs = 0;
  cfg.event_only_epochs = 0;
  train::Trainer<float> trainer(m, cfg);
  std::vector<train::EpochSummary> summaries = trainer.fit(corpus, nullptr);
  CHECK(summaries.empty());
  CHECK(snapshot_matches(m, before));
}

TEST_CASE("a poisoned parameter fails fast with a located error") {
  data::Corpus corpus = data::generate_planted_corpus(tiny_planted(), 9);
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
  m.params().get("state.emb.symptom.table").value()(0, 0) =
      std::numeric_limits<float>::quiet_NaN();

  train::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.event_only_epochs = 0;
  cfg.batch_size = 4;
  train::Trainer<float> trainer(m, cfg);
  CHECK_THROWS_WITH_AS(trainer.fit(corpus, nullptr),
                       doctest::Contains("epoch 1"), NumericError);
}

TEST_CASE("learning-rate schedule warms up then decays linearly") {
  CHECK(train::lr_schedule(2.0, 0.1, 0, 100) == doctest::Approx(0.2));
  CHECK(train::lr_schedule(2.0, 0.1, 9, 100) == doctest::Approx(2.0));
  CHECK(train::lr_schedule(2.0, 0.1, 10, 100) == doctest::Approx(2.0));
  CHECK(train::lr_schedule(2.0, 0.1, 55, 100) == doctest::Approx(1.0));
  CHECK(train::lr_schedule(2.0, 0.1, 99, 100) ==
        doctest::Approx(2.0 / 90.0));
  // No warm-up: decay starts immediately from the base rate.
  CHECK(train::lr_schedule(2.0, 0.0, 0, 100) == doctest::Approx(2.0));
  CHECK(train::lr_schedule(2.0, 0.0, 50, 100) == doctest::Approx(1.0));
  // Degenerate inputs fall back to the base rate.
  CHECK(train::lr_schedule(2.0, 0.1, 0, 0) == 2.0);
  CHECK(train::lr_schedule(2.0, 1.0, 3, 4) == doctest::Approx(2.0));
}

TEST_CASE("trainer validation") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);

  SUBCASE("empty corpus") {
    train::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.event_only_epochs = 1;
    train::Trainer<float> trainer(m, cfg);
    data::Corpus empty;
    CHECK_THROWS_AS(trainer.fit(empty, nullptr), ValidationError);
  }

  SUBCASE("bad configs") {
    train::TrainConfig cfg;
    cfg.epochs = -1;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.event_only_epochs = cfg.epochs + 1;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.warmup_fraction = 1.5;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.grad_clip = 0.0;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
    cfg = train::TrainConfig{};
    cfg.weights.y_d = -0.5;
    CHECK_THROWS_AS(train::Trainer<float>(m, cfg), ConfigError);
  }
}
