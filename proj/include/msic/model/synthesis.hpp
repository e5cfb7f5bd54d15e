#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "msic/autodiff/var.hpp"
#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/model/bootstrap.hpp"
#include "msic/model/event_synthesis.hpp"
#include "msic/model/model.hpp"

namespace msic::model {

enum class ReportDecode { kGreedy, kSample };

struct SynthesisOptions {
  SamplingConfig sampling;
  bool with_reports = false;
  ReportDecode report_decode = ReportDecode::kGreedy;
  double temperature = 1.0;
};

/// Draft and polished paragraphs produced by one deliberation round.
struct GeneratedReport {
  data::Report draft;
  data::Report polish;
};

/// Rolls the model forward over one patient record at synthesis time.
/// Latent states are drawn from the prior exactly once per visit and
/// kept for the whole record; all math runs without gradient tracking.
///
/// Random draws per operation, in pinned order:
///   push_observed:   d_h prior noises.
///   synthesize_next: symptom sampling, diagnosis sampling, d_h prior
///     noises, medication sampling, then (optional) report sampling in
///     paragraph order chief/illness/prescription.
///   complete_visit:  d_h prior noises, then medication sampling, then
///     optional report draws.
template <typename S>
class SynthesisChain {
 public:
  explicit SynthesisChain(const MsicModel<S>& model) : model_(&model) {
    num::NoGradGuard guard;
    zero_h_ = Var<S>::constant(
        num::Mat<S>::Zero(1, model.config().latent_dim));
    h_ = zero_h_;
  }

  std::size_t visit_count() const { return hist_s_.size(); }
  const Var<S>& health_state() const { return h_; }
  const ContextualReps<S>& last_reps() const { return reps_; }

  /// Encodes an observed visit, advances the prior latent chain.
  void push_observed(const data::Visit& visit, Rng& rng) {
    num::NoGradGuard guard;
    hist_s_.push_back(model_->state().encode_set(data::Kind::kSymptom,
                                                 visit.symptoms));
    hist_d_.push_back(model_->state().encode_set(data::Kind::kDiagnosis,
                                                 visit.diagnoses));
    hist_m_.push_back(model_->state().encode_set(data::Kind::kMedication,
                                                 visit.medications));
    reps_ = model_->state().contextual(hist_s_, hist_d_, hist_m_);
    advance_state(rng);
  }

  /// Synthesizes the next visit (symptoms, then diagnoses, then the
  /// state advance, then medications) and appends it to the chain.
  data::Visit synthesize_next(const SynthesisOptions& opts, Rng& rng) {
    num::NoGradGuard guard;
    if (hist_s_.empty()) {
      throw ValidationError("synthesize_next requires at least one prior visit");
    }
    const data::VocabSet& vocabs = model_->vocabs();
    Var<S> s_probs = model_->events().predict_next_symptoms(h_);
    data::EventSet s = sample_event_set(s_probs.value(), data::Kind::kSymptom,
                                        opts.sampling, rng);
    Var<S> e_s = model_->state().encode_set(data::Kind::kSymptom, s);
    hist_s_.push_back(e_s);
    Var<S> es_ctx = model_->state().symptom_context(hist_s_);
    Var<S> d_probs = model_->events().predict_next_diagnoses(h_, es_ctx);
    data::EventSet d = sample_event_set(d_probs.value(),
                                        data::Kind::kDiagnosis, opts.sampling,
                                        rng);
    return finish_visit(s, d, es_ctx, opts, rng);
  }

  /// Cross-type path: keeps the given symptoms/diagnoses, advances the
  /// chain, and lets the model emit the medications (and report).
  data::Visit complete_visit(const data::EventSet& symptoms,
                             const data::EventSet& diagnoses,
                             const SynthesisOptions& opts, Rng& rng) {
    num::NoGradGuard guard;
    hist_s_.push_back(model_->state().encode_set(data::Kind::kSymptom,
                                                 symptoms));
    Var<S> es_ctx = model_->state().symptom_context(hist_s_);
    return finish_visit(symptoms, diagnoses, es_ctx, opts, rng);
  }

  /// Deliberative report for the most recently pushed visit.
  GeneratedReport generate_report(const SynthesisOptions& opts,
                                  Rng& rng) const {
    num::NoGradGuard guard;
    if (hist_s_.empty()) {
      throw ValidationError("generate_report requires at least one visit");
    }
    const ReportGeneration<S>& gen = model_->reports();
    const data::Vocabulary& words = model_->vocabs().word;
    Var<S> hp = gen.project_state(h_);
    GeneratedReport out;
    const data::Kind kinds[3] = {data::Kind::kSymptom, data::Kind::kDiagnosis,
                                 data::Kind::kMedication};
    std::vector<int> draft_ids[3];
    for (int i = 0; i < 3; ++i) {
      Var<S> prompts = gen.draft_prompts(kinds[i], hp, reps_);
      draft_ids[i] = decode(kinds[i], prompts.value(), opts, rng);
    }
    out.draft.chief_complaint = data::to_word_strings(draft_ids[0], words);
    out.draft.present_illness = data::to_word_strings(draft_ids[1], words);
    out.draft.prescription = data::to_word_strings(draft_ids[2], words);
    if (model_->config().ablate_deliberation) {
      out.polish = out.draft;
      return out;
    }
    Var<S> enc_s = gen.encode_paragraph(draft_ids[0]);
    Var<S> enc_d = gen.encode_paragraph(draft_ids[1]);
    Var<S> enc_m = gen.encode_paragraph(draft_ids[2]);
    std::vector<int> polish_ids[3];
    for (int i = 0; i < 3; ++i) {
      Var<S> prompts = gen.polish_prompts(kinds[i], hp, enc_s, enc_d, enc_m);
      polish_ids[i] = decode(kinds[i], prompts.value(), opts, rng);
    }
    out.polish.chief_complaint = data::to_word_strings(polish_ids[0], words);
    out.polish.present_illness = data::to_word_strings(polish_ids[1], words);
    out.polish.prescription = data::to_word_strings(polish_ids[2], words);
    return out;
  }

 private:
  /// Common tail: record diagnoses, advance the latent chain, emit
  /// medications, optionally generate the report, commit the visit.
  data::Visit finish_visit(const data::EventSet& symptoms,
                           const data::EventSet& diagnoses,
                           const Var<S>& es_ctx, const SynthesisOptions& opts,
                           Rng& rng) {
    hist_d_.push_back(model_->state().encode_set(data::Kind::kDiagnosis,
                                                 diagnoses));
    Var<S> ed_ctx = model_->state().diagnosis_context(hist_d_, es_ctx);
    reps_.s = es_ctx;
    reps_.d = ed_ctx;
    advance_state(rng);
    Var<S> m_probs = model_->events().predict_medications(h_, es_ctx, ed_ctx);
    data::EventSet meds = sample_event_set(
        m_probs.value(), data::Kind::kMedication, opts.sampling, rng);
    hist_m_.push_back(model_->state().encode_set(data::Kind::kMedication,
                                                 meds));
    reps_.m = model_->state().medication_context(hist_m_, es_ctx, ed_ctx);
    data::Visit visit;
    visit.symptoms = symptoms;
    visit.diagnoses = diagnoses;
    visit.medications = meds;
    if (opts.with_reports) {
      visit.report = generate_report(opts, rng).polish;
    }
    return visit;
  }

  void advance_state(Rng& rng) {
    if (model_->config().ablate_health_state) {
      h_ = zero_h_;
      return;
    }
    num::GaussianVar<S> prior =
        model_->state().prior_params(reps_.s, reps_.d);
    num::Mat<S> noise(1, model_->config().latent_dim);
    for (Eigen::Index i = 0; i < noise.cols(); ++i) {
      noise(0, i) = static_cast<S>(rng.normal());
    }
    zs_.push_back(num::reparameterize(prior, noise));
    h_ = model_->state().compose_health_state(zs_);
  }

  std::vector<int> decode(data::Kind kind, const num::Mat<S>& prompts,
                          const SynthesisOptions& opts, Rng& rng) const {
    if (opts.report_decode == ReportDecode::kSample) {
      return model_->reports().decode_sample(kind, prompts, opts.temperature,
                                             rng);
    }
    return model_->reports().decode_greedy(kind, prompts);
  }

  const MsicModel<S>* model_;
  std::vector<Var<S>> hist_s_, hist_d_, hist_m_, zs_;
  ContextualReps<S> reps_;
  Var<S> h_, zero_h_;
};

/// Next-visit synthesis for an observed prefix (latent chain drawn
/// from the prior over the prefix, one draw per visit, in order).
template <typename S>
data::Visit synthesize_next_visit(const MsicModel<S>& model,
                                  const std::vector<data::Visit>& prefix,
                                  const SynthesisOptions& opts, Rng& rng) {
  if (prefix.empty()) {
    throw ValidationError("synthesize_next_visit requires a non-empty prefix");
  }
  SynthesisChain<S> chain(model);
  for (const data::Visit& v : prefix) chain.push_observed(v, rng);
  return chain.synthesize_next(opts, rng);
}

/// Whole-record synthesis. The first visit comes from `seed_visit`
/// when given; otherwise its symptoms and diagnoses are bootstrapped
/// from training statistics and the model fills in the medications.
/// `total_visits` <= 0 samples the record length from the empirical
/// histogram (drawn before any visit content).
template <typename S>
data::PatientRecord synthesize_record(const MsicModel<S>& model,
                                      const BootstrapStats& stats,
                                      const std::optional<data::Visit>& seed_visit,
                                      int total_visits,
                                      const SynthesisOptions& opts, Rng& rng,
                                      std::string patient_id) {
  data::PatientRecord rec;
  rec.patient_id = std::move(patient_id);
  const int target =
      total_visits > 0 ? total_visits : stats.sample_visit_count(rng);
  SynthesisChain<S> chain(model);
  if (seed_visit) {
    chain.push_observed(*seed_visit, rng);
    rec.visits.push_back(*seed_visit);
    if (opts.with_reports && !rec.visits.back().report) {
      rec.visits.back().report = chain.generate_report(opts, rng).polish;
    }
  } else {
    data::EventSet s =
        stats.sample_first_visit_set(data::Kind::kSymptom, rng);
    data::EventSet d =
        stats.sample_first_visit_set(data::Kind::kDiagnosis, rng);
    rec.visits.push_back(chain.complete_visit(s, d, opts, rng));
  }
  while (static_cast<int>(rec.visits.size()) < target) {
    rec.visits.push_back(chain.synthesize_next(opts, rng));
  }
  return rec;
}

namespace detail {
inline std::string synthetic_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
  return buf;
}
}  // namespace detail

/// De-novo corpus: `count` records, bootstrapped first visits, record
/// lengths from the empirical histogram unless `horizon` > 0 fixes
/// them. One forked rng per record keeps records independent.
template <typename S>
data::Corpus synthesize_corpus(const MsicModel<S>& model,
                               const BootstrapStats& stats, int count,
                               int horizon, const SynthesisOptions& opts,
                               std::uint64_t seed) {
  if (count < 1) throw ParameterError("synthesize_corpus: count must be >= 1");
  data::Corpus out;
  out.vocabs = model.vocabs();
  Rng master(seed);
  for (int i = 0; i < count; ++i) {
    Rng rec_rng = master.fork(static_cast<std::uint64_t>(i));
    out.records.push_back(synthesize_record(
        model, stats, std::nullopt, horizon, opts, rec_rng,
        detail::synthetic_id("SYN", static_cast<std::size_t>(i))));
  }
  return out;
}

/// Cross-type synthesis: every visit keeps its observed symptoms and
/// diagnoses; medications (and reports, if requested) are re-emitted
/// by the model conditioned on the evolving latent chain.
template <typename S>
data::Corpus cross_type_corpus(const MsicModel<S>& model,
                               const data::Corpus& real,
                               const SynthesisOptions& opts,
                               std::uint64_t seed) {
  data::Corpus out;
  out.vocabs = model.vocabs();
  Rng master(seed);
  for (std::size_t i = 0; i < real.records.size(); ++i) {
    Rng rec_rng = master.fork(static_cast<std::uint64_t>(i));
    const data::PatientRecord& src = real.records[i];
    data::PatientRecord rec;
    rec.patient_id = detail::synthetic_id("XT", i);
    SynthesisChain<S> chain(model);
    for (const data::Visit& v : src.visits) {
      rec.visits.push_back(
          chain.complete_visit(v.symptoms, v.diagnoses, opts, rec_rng));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

/// Longitudinal synthesis: each record is extended by `extra_visits`
/// model-generated visits following its observed prefix.
template <typename S>
data::Corpus extend_corpus(const MsicModel<S>& model, const data::Corpus& real,
                           int extra_visits, const SynthesisOptions& opts,
                           std::uint64_t seed) {
  if (extra_visits < 1) {
    throw ParameterError("extend_corpus: extra_visits must be >= 1");
  }
  data::Corpus out;
  out.vocabs = model.vocabs();
  Rng master(seed);
  for (std::size_t i = 0; i < real.records.size(); ++i) {
    Rng rec_rng = master.fork(static_cast<std::uint64_t>(i));
    const data::PatientRecord& src = real.records[i];
    data::PatientRecord rec;
    rec.patient_id = detail::synthetic_id("LG", i);
    rec.visits = src.visits;
    SynthesisChain<S> chain(model);
    for (const data::Visit& v : src.visits) chain.push_observed(v, rec_rng);
    for (int k = 0; k < extra_visits; ++k) {
      rec.visits.push_back(chain.synthesize_next(opts, rec_rng));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace msic::model
