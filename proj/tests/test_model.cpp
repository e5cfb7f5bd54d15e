#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "msic/data/planted.hpp"
#include "msic/model/bootstrap.hpp"
#include "msic/model/config.hpp"
#include "msic/model/event_synthesis.hpp"
#include "msic/model/model.hpp"
#include "msic/model/synthesis.hpp"
#include "msic/train/checkpoint.hpp"

using namespace msic;
using num::Mat;
using num::Var;
using FloatMat = num::Mat<float>;

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

data::VocabSet tiny_vocabs() {
  data::VocabSet v;
  v.symptom = data::planted_vocabulary(data::Kind::kSymptom, 6);
  v.diagnosis = data::planted_vocabulary(data::Kind::kDiagnosis, 5);
  v.medication = data::planted_vocabulary(data::Kind::kMedication, 4);
  v.word = data::planted_word_vocabulary();
  return v;
}

data::Corpus tiny_corpus(std::uint64_t seed, int patients = 8,
                         bool with_reports = true) {
  data::PlantedConfig cfg;
  cfg.symptom_vocab = 6;
  cfg.diagnosis_vocab = 5;
  cfg.medication_vocab = 4;
  cfg.patients = patients;
  cfg.mean_visits = 2.4;
  cfg.max_visits = 4;
  cfg.with_reports = with_reports;
  cfg.default_rules();
  return data::generate_planted_corpus(cfg, seed);
}

template <typename M>
bool bits_equal(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

bool params_equal(const num::ParamStore<float>& a,
                  const num::ParamStore<float>& b) {
  if (a.tensor_count() != b.tensor_count()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    if (a.entries()[i].name != b.entries()[i].name) return false;
    if (!bits_equal(a.entries()[i].var.value(), b.entries()[i].var.value())) {
      return false;
    }
  }
  return true;
}

struct TempPath {
  std::string path;
  explicit TempPath(std::string p) : path(std::move(p)) {}
  ~TempPath() { std::remove(path.c_str()); }
};

std::string file_bytes(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace

TEST_CASE("model construction is deterministic per seed") {
  model::MsicModel<float> a(tiny_config(), tiny_vocabs(), 3);
  model::MsicModel<float> b(tiny_config(), tiny_vocabs(), 3);
  model::MsicModel<float> c(tiny_config(), tiny_vocabs(), 4);
  CHECK(params_equal(a.params(), b.params()));
  CHECK(!params_equal(a.params(), c.params()));
  CHECK(a.params().scalar_count() > 0);
}

TEST_CASE("model config validation") {
  model::ModelConfig cfg = tiny_config();
  cfg.encoder_heads = 3;  // does not divide 16
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.hidden_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.max_report_len = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("set encoding") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 3);
  num::NoGradGuard guard;

  SUBCASE("order of construction does not matter (canonical sets)") {
    data::EventSet a =
        data::EventSet::from_indices(data::Kind::kSymptom, {4, 1, 2}, 6);
    data::EventSet b =
        data::EventSet::from_indices(data::Kind::kSymptom, {2, 4, 1}, 6);
    Var<float> ea = m.state().encode_set(data::Kind::kSymptom, a);
    Var<float> eb = m.state().encode_set(data::Kind::kSymptom, b);
    CHECK(bits_equal(ea.value(), eb.value()));  // bit-identical
  }
  SUBCASE("empty sets encode finitely and reproducibly") {
    data::EventSet e =
        data::EventSet::from_indices(data::Kind::kMedication, {}, 4);
    Var<float> enc = m.state().encode_set(data::Kind::kMedication, e);
    CHECK(enc.cols() == 16);
    CHECK(enc.value().allFinite());
    Var<float> enc2 = m.state().encode_set(data::Kind::kMedication, e);
    CHECK(bits_equal(enc.value(), enc2.value()));
  }
  SUBCASE("different sets encode differently") {
    data::EventSet a =
        data::EventSet::from_indices(data::Kind::kSymptom, {0}, 6);
    data::EventSet b =
        data::EventSet::from_indices(data::Kind::kSymptom, {1}, 6);
    CHECK_FALSE(
        bits_equal(m.state().encode_set(data::Kind::kSymptom, a).value(),
                   m.state().encode_set(data::Kind::kSymptom, b).value()));
  }
}

TEST_CASE("contextual representations are causal") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 5);
  data::Corpus corpus = tiny_corpus(8, 10, false);
  // Find a record with at least three visits.
  const data::PatientRecord* rec = nullptr;
  for (const auto& r : corpus.records) {
    if (r.visits.size() >= 3) rec = &r;
  }
  REQUIRE(rec != nullptr);
  num::NoGradGuard guard;

  auto encode_history = [&](std::size_t upto) {
    std::vector<Var<float>> hs, hd, hm;
    for (std::size_t t = 0; t < upto; ++t) {
      hs.push_back(
          m.state().encode_set(data::Kind::kSymptom, rec->visits[t].symptoms));
      hd.push_back(m.state().encode_set(data::Kind::kDiagnosis,
                                        rec->visits[t].diagnoses));
      hm.push_back(m.state().encode_set(data::Kind::kMedication,
                                        rec->visits[t].medications));
    }
    return std::make_tuple(hs, hd, hm);
  };

  auto [hs2, hd2, hm2] = encode_history(2);
  auto [hs3, hd3, hm3] = encode_history(3);
  model::ContextualReps<float> reps2 = m.state().contextual(hs2, hd2, hm2);
  model::ContextualReps<float> reps2b = m.state().contextual(hs2, hd2, hm2);
  model::ContextualReps<float> reps3 = m.state().contextual(hs3, hd3, hm3);
  // Pure function of its prefix: recomputation is bit-identical, and
  // nothing computed later (reps3) can change it.
  CHECK(bits_equal(reps2.s.value(), reps2b.s.value()));
  CHECK(bits_equal(reps2.d.value(), reps2b.d.value()));
  CHECK(bits_equal(reps2.m.value(), reps2b.m.value()));
  // Growing the history genuinely changes the pooled context.
  CHECK_FALSE(bits_equal(reps2.s.value(), reps3.s.value()));
  // symptom_context is the same path contextual() uses for .s.
  CHECK(bits_equal(m.state().symptom_context(hs2).value(), reps2.s.value()));

  SUBCASE("history length validation") {
    CHECK_THROWS_AS((void)m.state().contextual(hs2, hd3, hm2),
                    DimensionError);
    CHECK_THROWS_AS((void)m.state().contextual({}, {}, {}), DimensionError);
  }
}

TEST_CASE("prior and posterior heads") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 7);
  num::NoGradGuard guard;
  data::EventSet s = data::EventSet::from_indices(data::Kind::kSymptom, {1}, 6);
  data::EventSet d =
      data::EventSet::from_indices(data::Kind::kDiagnosis, {0, 2}, 5);
  data::EventSet med =
      data::EventSet::from_indices(data::Kind::kMedication, {3}, 4);
  Var<float> es = m.state().encode_set(data::Kind::kSymptom, s);
  Var<float> ed = m.state().encode_set(data::Kind::kDiagnosis, d);
  Var<float> em = m.state().encode_set(data::Kind::kMedication, med);

  num::GaussianVar<float> prior = m.state().prior_params(es, ed);
  num::GaussianVar<float> post = m.state().posterior_params(es, ed, em);
  CHECK(prior.mean.cols() == 8);
  CHECK(post.mean.cols() == 8);
  CHECK(prior.mean.value().allFinite());
  CHECK(post.mean.value().allFinite());
  // Medications condition the posterior but not the prior.
  data::EventSet med2 =
      data::EventSet::from_indices(data::Kind::kMedication, {0}, 4);
  Var<float> em2 = m.state().encode_set(data::Kind::kMedication, med2);
  num::GaussianVar<float> post2 = m.state().posterior_params(es, ed, em2);
  CHECK_FALSE(bits_equal(post.mean.value(), post2.mean.value()));
  CHECK(bits_equal(m.state().prior_params(es, ed).mean.value(), prior.mean.value()));

  SUBCASE("log-variances are clamped to [-10, 10]") {
    CHECK(prior.log_var.value().maxCoeff() <= 10.0f);
    CHECK(prior.log_var.value().minCoeff() >= -10.0f);
    CHECK(post.log_var.value().maxCoeff() <= 10.0f);
    CHECK(post.log_var.value().minCoeff() >= -10.0f);
  }
}

TEST_CASE("event probability heads stay in (0, 1)") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 9);
  num::NoGradGuard guard;
  Var<float> h = Var<float>::constant(FloatMat::Random(1, 8));
  Var<float> es = Var<float>::constant(FloatMat::Random(1, 16));
  Var<float> s_probs = m.events().predict_next_symptoms(h);
  Var<float> d_probs = m.events().predict_next_diagnoses(h, es);
  Var<float> m_probs = m.events().predict_medications(h, es, es);
  for (const Var<float>* probs : {&s_probs, &d_probs, &m_probs}) {
    CHECK(probs->value().minCoeff() > 0.0f);
    CHECK(probs->value().maxCoeff() < 1.0f);
  }
  CHECK(s_probs.cols() == 6);
  CHECK(d_probs.cols() == 5);
  CHECK(m_probs.cols() == 4);
}

TEST_CASE("event sampling strategies") {
  Mat<float> probs(1, 5);
  probs << 0.9f, 0.4f, 0.6f, 0.1f, 0.6f;

  SUBCASE("threshold keeps probabilities >= the threshold") {
    model::SamplingConfig cfg;
    cfg.strategy = model::SamplingStrategy::kThreshold;
    cfg.threshold = 0.6;
    Rng rng(1);
    data::EventSet s =
        model::sample_event_set(probs, data::Kind::kSymptom, cfg, rng);
    CHECK(s.indices == std::vector<int>{0, 2, 4});
  }
  SUBCASE("top-k keeps the k largest with ties to the lowest index") {
    model::SamplingConfig cfg;
    cfg.strategy = model::SamplingStrategy::kTopK;
    cfg.top_k = 2;
    Rng rng(1);
    data::EventSet s =
        model::sample_event_set(probs, data::Kind::kSymptom, cfg, rng);
    CHECK(s.indices == std::vector<int>{0, 2});
    cfg.top_k = 3;
    data::EventSet s3 =
        model::sample_event_set(probs, data::Kind::kSymptom, cfg, rng);
    CHECK(s3.indices == std::vector<int>{0, 2, 4});
  }
  SUBCASE("bernoulli sampling is deterministic given the rng") {
    model::SamplingConfig cfg;  // default strategy: kBernoulli
    Rng a(7), b(7);
    data::EventSet sa =
        model::sample_event_set(probs, data::Kind::kSymptom, cfg, a);
    data::EventSet sb =
        model::sample_event_set(probs, data::Kind::kSymptom, cfg, b);
    CHECK(sa.indices == sb.indices);
  }
  SUBCASE("strategy parsing and validation") {
    CHECK(model::sampling_strategy_from_name("top-k") ==
          model::SamplingStrategy::kTopK);
    CHECK_THROWS_AS((void)model::sampling_strategy_from_name("nope"),
                    ConfigError);
    model::SamplingConfig bad;
    bad.threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(5), ParameterError);
    bad = model::SamplingConfig{};
    bad.strategy = model::SamplingStrategy::kTopK;
    bad.top_k = 9;
    CHECK_THROWS_AS(bad.validate(5), ParameterError);
  }
}

TEST_CASE("synthesis chain and drivers") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 11);
  data::Corpus corpus = tiny_corpus(21, 6, false);
  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);
  model::SynthesisOptions opts;

  SUBCASE("de-novo synthesis is deterministic and well-formed") {
    data::Corpus a = model::synthesize_corpus(m, stats, 5, 0, opts, 17);
    data::Corpus b = model::synthesize_corpus(m, stats, 5, 0, opts, 17);
    data::Corpus c = model::synthesize_corpus(m, stats, 5, 0, opts, 18);
    CHECK(data::serialize_corpus(a) == data::serialize_corpus(b));
    CHECK(data::serialize_corpus(a) != data::serialize_corpus(c));
    CHECK(a.records.size() == 5);
    CHECK(a.records[0].patient_id == "SYN000000");
    CHECK(a.records[4].patient_id == "SYN000004");
    for (const auto& rec : a.records) {
      CHECK(!rec.visits.empty());
      for (const auto& v : rec.visits) CHECK(!v.report.has_value());
    }
  }
  SUBCASE("horizon fixes the record length") {
    data::Corpus a = model::synthesize_corpus(m, stats, 4, 3, opts, 17);
    for (const auto& rec : a.records) CHECK(rec.visits.size() == 3);
  }
  SUBCASE("cross-type synthesis preserves symptoms and diagnoses") {
    data::Corpus xt = model::cross_type_corpus(m, corpus, opts, 23);
    REQUIRE(xt.records.size() == corpus.records.size());
    for (std::size_t i = 0; i < xt.records.size(); ++i) {
      REQUIRE(xt.records[i].visits.size() == corpus.records[i].visits.size());
      CHECK(xt.records[i].patient_id.rfind("XT", 0) == 0);
      for (std::size_t t = 0; t < xt.records[i].visits.size(); ++t) {
        CHECK(xt.records[i].visits[t].symptoms.indices ==
              corpus.records[i].visits[t].symptoms.indices);
        CHECK(xt.records[i].visits[t].diagnoses.indices ==
              corpus.records[i].visits[t].diagnoses.indices);
      }
    }
    data::Corpus xt2 = model::cross_type_corpus(m, corpus, opts, 23);
    CHECK(data::serialize_corpus(xt) == data::serialize_corpus(xt2));
  }
  SUBCASE("longitudinal extension appends after the observed prefix") {
    data::Corpus lg = model::extend_corpus(m, corpus, 2, opts, 29);
    REQUIRE(lg.records.size() == corpus.records.size());
    for (std::size_t i = 0; i < lg.records.size(); ++i) {
      const auto& orig = corpus.records[i].visits;
      const auto& ext = lg.records[i].visits;
      REQUIRE(ext.size() == orig.size() + 2);
      for (std::size_t t = 0; t < orig.size(); ++t) {
        CHECK(ext[t].symptoms.indices == orig[t].symptoms.indices);
        CHECK(ext[t].diagnoses.indices == orig[t].diagnoses.indices);
        CHECK(ext[t].medications.indices == orig[t].medications.indices);
      }
    }
    CHECK_THROWS_AS(
        (void)model::extend_corpus(m, corpus, 0, opts, 1), ParameterError);
  }
  SUBCASE("reports attach only when requested") {
    model::SynthesisOptions with = opts;
    with.with_reports = true;
    data::Corpus a = model::synthesize_corpus(m, stats, 3, 2, with, 31);
    for (const auto& rec : a.records) {
      for (const auto& v : rec.visits) {
        REQUIRE(v.report.has_value());
        CHECK(v.report->chief_complaint.size() <=
              static_cast<std::size_t>(tiny_config().max_report_len));
      }
    }
  }
  SUBCASE("sampled report decoding is deterministic per seed") {
    model::SynthesisOptions with = opts;
    with.with_reports = true;
    with.report_decode = model::ReportDecode::kSample;
    with.temperature = 0.8;
    data::Corpus a = model::synthesize_corpus(m, stats, 3, 2, with, 37);
    data::Corpus b = model::synthesize_corpus(m, stats, 3, 2, with, 37);
    CHECK(data::serialize_corpus(a) == data::serialize_corpus(b));
  }
  SUBCASE("chain rejects next-visit synthesis without history") {
    model::SynthesisChain<float> chain(m);
    Rng rng(1);
    CHECK_THROWS_AS((void)chain.synthesize_next(opts, rng), ValidationError);
    CHECK_THROWS_AS((void)chain.generate_report(opts, rng), ValidationError);
  }
}

TEST_CASE("deliberation wiring") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 13);
  num::NoGradGuard guard;
  const auto& rg = m.reports();

  Var<float> h = Var<float>::constant(FloatMat::Random(1, 8));
  Var<float> hp = rg.project_state(h);
  model::ContextualReps<float> reps;
  reps.s = Var<float>::constant(FloatMat::Random(1, 16));
  reps.d = Var<float>::constant(FloatMat::Random(1, 16));
  reps.m = Var<float>::constant(FloatMat::Random(1, 16));

  SUBCASE("draft prompts grow with the paragraph kind") {
    CHECK(rg.draft_prompts(data::Kind::kSymptom, hp, reps).rows() == 2);
    CHECK(rg.draft_prompts(data::Kind::kDiagnosis, hp, reps).rows() == 3);
    CHECK(rg.draft_prompts(data::Kind::kMedication, hp, reps).rows() == 4);
    CHECK_THROWS_AS((void)rg.draft_prompts(data::Kind::kWord, hp, reps),
                    ParameterError);
  }
  SUBCASE("polish prompts exclude the generator's own paragraph") {
    Var<float> enc_s = rg.encode_paragraph({6, 7});
    Var<float> enc_d = rg.encode_paragraph({8});
    Var<float> enc_m = rg.encode_paragraph({9});
    Var<float> for_s =
        rg.polish_prompts(data::Kind::kSymptom, hp, enc_s, enc_d, enc_m);
    CHECK(for_s.rows() == 3);
    // Changing the diagnosis draft changes the symptom polish prompts...
    Var<float> enc_d2 = rg.encode_paragraph({10, 11});
    Var<float> for_s2 =
        rg.polish_prompts(data::Kind::kSymptom, hp, enc_s, enc_d2, enc_m);
    CHECK_FALSE(bits_equal(for_s.value(), for_s2.value()));
    // ...but changing its own draft does not.
    Var<float> enc_s2 = rg.encode_paragraph({12});
    Var<float> for_s3 =
        rg.polish_prompts(data::Kind::kSymptom, hp, enc_s2, enc_d, enc_m);
    CHECK(bits_equal(for_s.value(), for_s3.value()));
  }
  SUBCASE("empty paragraphs encode as the <empty> token") {
    CHECK(bits_equal(rg.encode_paragraph({}).value(),
                    rg.encode_paragraph({rg.empty_id()}).value()));
  }
  SUBCASE("greedy decode respects the length cap and is deterministic") {
    Mat<float> prompts = rg.draft_prompts(data::Kind::kSymptom, hp, reps)
                             .value();
    std::vector<int> a = rg.decode_greedy(data::Kind::kSymptom, prompts);
    std::vector<int> b = rg.decode_greedy(data::Kind::kSymptom, prompts);
    CHECK(a == b);
    CHECK(a.size() <= 8);
    Rng r1(5), r2(5);
    std::vector<int> s1 =
        rg.decode_sample(data::Kind::kSymptom, prompts, 0.9, r1);
    std::vector<int> s2 =
        rg.decode_sample(data::Kind::kSymptom, prompts, 0.9, r2);
    CHECK(s1 == s2);
    CHECK(s1.size() <= 8);
  }
}

TEST_CASE("ablation switches") {
  data::Corpus corpus = tiny_corpus(41, 6, false);
  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);
  model::SynthesisOptions opts;

  SUBCASE("w/o h_t zeroes the latent path") {
    model::ModelConfig cfg = tiny_config();
    cfg.ablate_health_state = true;
    model::MsicModel<float> m(cfg, tiny_vocabs(), 5);
    model::SynthesisChain<float> chain(m);
    Rng rng(3);
    chain.push_observed(corpus.records[0].visits[0], rng);
    CHECK(chain.health_state().value().cwiseAbs().maxCoeff() == 0.0f);
  }
  SUBCASE("w/o MV truncates history to the current visit") {
    model::ModelConfig cfg = tiny_config();
    cfg.ablate_multi_visit = true;
    model::MsicModel<float> m(cfg, tiny_vocabs(), 5);
    // Two different histories ending in the same visit must agree.
    const data::Visit& last = corpus.records[0].visits[0];
    num::NoGradGuard guard;
    auto enc = [&](const data::Visit& v) {
      return std::make_tuple(
          m.state().encode_set(data::Kind::kSymptom, v.symptoms),
          m.state().encode_set(data::Kind::kDiagnosis, v.diagnoses),
          m.state().encode_set(data::Kind::kMedication, v.medications));
    };
    auto [s1, d1, m1] = enc(last);
    auto [s0, d0, m0] = enc(corpus.records[1].visits[0]);
    model::ContextualReps<float> with_history =
        m.state().contextual({s0, s1}, {d0, d1}, {m0, m1});
    model::ContextualReps<float> alone =
        m.state().contextual({s1}, {d1}, {m1});
    CHECK(bits_equal(with_history.s.value(), alone.s.value()));
    CHECK(bits_equal(with_history.d.value(), alone.d.value()));
    CHECK(bits_equal(with_history.m.value(), alone.m.value()));
  }
  SUBCASE("w/o MA drops the polish phase") {
    model::ModelConfig cfg = tiny_config();
    cfg.ablate_deliberation = true;
    model::MsicModel<float> m(cfg, tiny_vocabs(), 5);
    model::SynthesisChain<float> chain(m);
    Rng rng(3);
    chain.push_observed(corpus.records[0].visits[0], rng);
    model::GeneratedReport rep = chain.generate_report(opts, rng);
    CHECK(rep.polish.chief_complaint == rep.draft.chief_complaint);
    CHECK(rep.polish.present_illness == rep.draft.present_illness);
    CHECK(rep.polish.prescription == rep.draft.prescription);
  }
}

TEST_CASE("bootstrap statistics") {
  data::Corpus corpus = tiny_corpus(51, 10, false);
  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);

  SUBCASE("rates are per-visit marginals") {
    // Recount one code by hand.
    const int code = 0;
    double count = 0;
    for (const auto& rec : corpus.records) {
      for (const auto& v : rec.visits) {
        if (v.symptoms.contains(code)) count += 1;
      }
    }
    CHECK(stats.rates[0][0] ==
          doctest::Approx(count / static_cast<double>(corpus.visit_count())));
  }
  SUBCASE("sampling is deterministic and in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 20; ++i) {
      const int va = stats.sample_visit_count(a);
      const int vb = stats.sample_visit_count(b);
      CHECK(va == vb);
      CHECK(va >= 1);
      data::EventSet s = stats.sample_first_visit_set(data::Kind::kSymptom, a);
      data::EventSet s2 = stats.sample_first_visit_set(data::Kind::kSymptom, b);
      CHECK(s.indices == s2.indices);
    }
  }
  SUBCASE("tensor round trip preserves every histogram to f32 precision") {
    model::BootstrapStats back =
        model::BootstrapStats::from_tensors(stats.to_tensors());
    for (int k = 0; k < 3; ++k) {
      REQUIRE(back.rates[k].size() == stats.rates[k].size());
      REQUIRE(back.size_hist[k].size() == stats.size_hist[k].size());
      for (std::size_t i = 0; i < back.rates[k].size(); ++i) {
        CHECK(back.rates[k][i] ==
              doctest::Approx(stats.rates[k][i]).epsilon(1e-6));
      }
    }
    REQUIRE(back.visit_count_hist.size() == stats.visit_count_hist.size());
    for (std::size_t i = 0; i < back.visit_count_hist.size(); ++i) {
      CHECK(back.visit_count_hist[i] ==
            doctest::Approx(stats.visit_count_hist[i]).epsilon(1e-6));
    }
  }
  SUBCASE("empty corpus is rejected") {
    data::Corpus empty;
    empty.vocabs = corpus.vocabs;
    CHECK_THROWS_AS((void)model::BootstrapStats::from_corpus(empty),
                    ValidationError);
  }
}

TEST_CASE("checkpoint round trip") {
  model::MsicModel<float> m(tiny_config(), tiny_vocabs(), 19);
  data::Corpus corpus = tiny_corpus(61, 6, false);
  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);
  Settings settings;
  apply_desk_scale(settings);
  settings.model = tiny_config();

  TempPath p1("ckpt_a.msic");
  TempPath p2("ckpt_b.msic");
  train::save_checkpoint(p1.path, m, stats, settings);

  SUBCASE("load restores every tensor byte-for-byte") {
    train::LoadedCheckpoint loaded = train::load_checkpoint(p1.path,
                                                            tiny_vocabs());
    CHECK(params_equal(loaded.model->params(), m.params()));
    CHECK(loaded.settings.model.hidden_dim == 16);
    train::save_checkpoint(p2.path, *loaded.model, loaded.stats,
                           loaded.settings);
    CHECK(file_bytes(p1.path) == file_bytes(p2.path));
  }
  SUBCASE("file starts with the MSICCKPT magic") {
    CHECK(file_bytes(p1.path).rfind("MSICCKPT", 0) == 0);
  }
  SUBCASE("vocabulary digest mismatch is rejected") {
    data::VocabSet other = tiny_vocabs();
    other.symptom =
        data::Vocabulary(data::Kind::kSymptom, {"S00", "S01"}, {});
    CHECK_THROWS_AS((void)train::load_checkpoint(p1.path, other),
                    ValidationError);
  }
  SUBCASE("corrupt magic and truncation raise ParseError") {
    std::string bytes = file_bytes(p1.path);
    bytes[0] = 'X';
    {
      std::FILE* f = std::fopen(p2.path.c_str(), "wb");
      std::fwrite(bytes.data(), 1, bytes.size(), f);
      std::fclose(f);
    }
    CHECK_THROWS_AS((void)train::load_checkpoint(p2.path, tiny_vocabs()),
                    ParseError);
    std::string cut = file_bytes(p1.path).substr(0, 100);
    {
      std::FILE* f = std::fopen(p2.path.c_str(), "wb");
      std::fwrite(cut.data(), 1, cut.size(), f);
      std::fclose(f);
    }
    CHECK_THROWS_AS((void)train::load_checkpoint(p2.path, tiny_vocabs()),
                    ParseError);
    CHECK_THROWS_AS((void)train::load_checkpoint("no_such.msic", tiny_vocabs()),
                    ParseError);
  }
}
