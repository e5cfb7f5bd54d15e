#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/core/rng.hpp"
#include "msic/model/model.hpp"
#include "msic/nn/gaussian.hpp"
#include "msic/train/config.hpp"

namespace msic::train {

using num::Var;

/// Unweighted values of one visit's loss terms. The final visit of a
/// record has no next-visit terms (nothing to teacher-force against).
struct VisitLossValues {
  double l_s = 0, l_d = 0, l_m = 0;
  double l_ys = 0, l_yd = 0, l_ym = 0;
  double l_kl = 0;
  bool has_next = false;     // next-visit symptom/diagnosis terms present
  bool has_reports = false;  // report terms present
  bool has_kl = false;

  double weighted_total(const LossWeights& w) const {
    double t = w.m * l_m;
    if (has_next) t += w.s * l_s + w.d * l_d;
    if (has_kl) t += w.kl * l_kl;
    if (has_reports) t += w.y_s * l_ys + w.y_d * l_yd + w.y_m * l_ym;
    return t;
  }
};

/// How the report branch participates in a loss pass. The staged
/// schedule optimizes events alone at first, but the telemetry total
/// stays comparable across epochs only if the report terms are always
/// measured; kTelemetry evaluates them without touching the graph.
enum class ReportMode {
  kOff,        // skip the report branch entirely
  kTelemetry,  // forward-only values; excluded from the optimized total
  kTrain,      // full contribution to the optimized total
};

/// First-visit Gaussian parameters, recorded for telemetry probes.
struct KlProbe {
  std::vector<double> mu_q, lv_q, mu_p, lv_p;
  double kl = 0;
  bool present = false;
};

template <typename S>
struct PatientLoss {
  Var<S> total;  // (1,1) graph node: sum of weighted visit totals
  std::vector<VisitLossValues> visits;
  KlProbe probe;
};

namespace detail {

template <typename S>
num::Mat<S> multi_hot(const data::EventSet& set, int vocab) {
  num::Mat<S> row = num::Mat<S>::Zero(1, vocab);
  for (int idx : set.indices) row(0, idx) = S(1);
  return row;
}

template <typename S>
std::vector<double> row_values(const Var<S>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(v.value()(0, i));
  }
  return out;
}

}  // namespace detail

/// Builds the loss graph for one patient record, teacher-forced
/// throughout. During training latent samples come from the posterior;
/// the prior enters through the KL terms. Noise draws: latent_dim
/// normals per visit, in visit order; the report branch never consumes
/// randomness, so the draw sequence is identical across report modes.
template <typename S>
PatientLoss<S> patient_loss(const model::MsicModel<S>& m,
                            const data::PatientRecord& rec,
                            const LossWeights& w, ReportMode report_mode,
                            Rng& noise_rng) {
  if (rec.visits.empty()) {
    throw ValidationError("patient_loss: record has no visits");
  }
  const model::ModelConfig& cfg = m.config();
  const data::VocabSet& vocabs = m.vocabs();
  const std::size_t T = rec.visits.size();

  // Per-visit set embeddings, then contextual reps for each prefix.
  std::vector<Var<S>> e_s, e_d, e_m;
  for (const data::Visit& v : rec.visits) {
    e_s.push_back(m.state().encode_set(data::Kind::kSymptom, v.symptoms));
    e_d.push_back(m.state().encode_set(data::Kind::kDiagnosis, v.diagnoses));
    e_m.push_back(m.state().encode_set(data::Kind::kMedication, v.medications));
  }
  std::vector<model::ContextualReps<S>> reps(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Var<S>> hs(e_s.begin(), e_s.begin() + t + 1);
    std::vector<Var<S>> hd(e_d.begin(), e_d.begin() + t + 1);
    std::vector<Var<S>> hm(e_m.begin(), e_m.begin() + t + 1);
    reps[t] = m.state().contextual(hs, hd, hm);
  }

  // Latent chain from the posterior; h_t attends over z_1..z_t.
  PatientLoss<S> out;
  std::vector<Var<S>> zs, hs_state(T);
  std::vector<Var<S>> kl_terms(T);
  Var<S> zero_h;
  if (cfg.ablate_health_state) {
    zero_h = Var<S>::constant(num::Mat<S>::Zero(1, cfg.latent_dim));
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (cfg.ablate_health_state) {
      hs_state[t] = zero_h;
      continue;
    }
    num::GaussianVar<S> prior = m.state().prior_params(reps[t].s, reps[t].d);
    num::GaussianVar<S> post =
        m.state().posterior_params(reps[t].s, reps[t].d, reps[t].m);
    num::Mat<S> noise(1, cfg.latent_dim);
    for (Eigen::Index i = 0; i < noise.cols(); ++i) {
      noise(0, i) = static_cast<S>(noise_rng.normal());
    }
    zs.push_back(num::reparameterize(post, noise));
    hs_state[t] = m.state().compose_health_state(zs);
    kl_terms[t] = num::kl_diagonal(post, prior);
    if (t == 0) {
      out.probe.present = true;
      out.probe.mu_q = detail::row_values(post.mean);
      out.probe.lv_q = detail::row_values(post.log_var);
      out.probe.mu_p = detail::row_values(prior.mean);
      out.probe.lv_p = detail::row_values(prior.log_var);
      out.probe.kl = static_cast<double>(kl_terms[t].item());
    }
  }

  Var<S> total;
  bool have_total = false;
  // Zero-weighted terms contribute an exact zero either way; leaving
  // them out keeps the graph lean without changing the total.
  auto accumulate = [&](const Var<S>& term, double weight) {
    if (weight == 0.0) return;
    Var<S> scaled = num::scale(term, static_cast<S>(weight));
    total = have_total ? num::add(total, scaled) : scaled;
    have_total = true;
  };

  out.visits.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    VisitLossValues& vals = out.visits[t];
    const data::Visit& visit = rec.visits[t];
    const Var<S>& h = hs_state[t];

    Var<S> pm = m.events().predict_medications(h, reps[t].s, reps[t].d);
    Var<S> l_m = num::bce_mean(
        pm, detail::multi_hot<S>(visit.medications,
                                 vocabs.medication.size()));
    vals.l_m = static_cast<double>(l_m.item());
    accumulate(l_m, w.m);

    if (t + 1 < T) {
      vals.has_next = true;
      Var<S> ps = m.events().predict_next_symptoms(h);
      Var<S> l_s = num::bce_mean(
          ps, detail::multi_hot<S>(rec.visits[t + 1].symptoms,
                                   vocabs.symptom.size()));
      vals.l_s = static_cast<double>(l_s.item());
      accumulate(l_s, w.s);
      Var<S> pd = m.events().predict_next_diagnoses(h, reps[t + 1].s);
      Var<S> l_d = num::bce_mean(
          pd, detail::multi_hot<S>(rec.visits[t + 1].diagnoses,
                                   vocabs.diagnosis.size()));
      vals.l_d = static_cast<double>(l_d.item());
      accumulate(l_d, w.d);
    }

    if (!cfg.ablate_health_state) {
      vals.has_kl = true;
      vals.l_kl = static_cast<double>(kl_terms[t].item());
      accumulate(kl_terms[t], w.kl);
    }

    if (report_mode != ReportMode::kOff && visit.report) {
      vals.has_reports = true;
      const bool train_reports = report_mode == ReportMode::kTrain;
      std::optional<num::NoGradGuard> guard;
      if (!train_reports) guard.emplace();
      const model::ReportGeneration<S>& gen = m.reports();
      const data::Kind kinds[3] = {data::Kind::kSymptom,
                                   data::Kind::kDiagnosis,
                                   data::Kind::kMedication};
      Var<S> hp = gen.project_state(h);
      std::vector<int> gold[3];
      Var<S> draft_nll[3];
      Var<S> draft_prompts[3];
      for (int k = 0; k < 3; ++k) {
        gold[k] = data::to_word_ids(visit.report->paragraph(kinds[k]),
                                    vocabs.word);
        draft_prompts[k] = gen.draft_prompts(kinds[k], hp, reps[t]);
        draft_nll[k] = gen.paragraph_nll(kinds[k], draft_prompts[k], gold[k]);
      }
      Var<S> loss_k[3];
      if (cfg.ablate_deliberation) {
        for (int k = 0; k < 3; ++k) loss_k[k] = draft_nll[k];
      } else {
        // Greedy drafts feed the polish phase; gradients do not flow
        // through the discrete token choice.
        std::vector<int> draft_ids[3];
        {
          num::NoGradGuard inner;
          for (int k = 0; k < 3; ++k) {
            draft_ids[k] = gen.decode_greedy(kinds[k],
                                             draft_prompts[k].value());
          }
        }
        Var<S> enc[3];
        for (int k = 0; k < 3; ++k) enc[k] = gen.encode_paragraph(draft_ids[k]);
        for (int k = 0; k < 3; ++k) {
          Var<S> prompts =
              gen.polish_prompts(kinds[k], hp, enc[0], enc[1], enc[2]);
          Var<S> polish_nll = gen.paragraph_nll(kinds[k], prompts, gold[k]);
          loss_k[k] =
              num::scale(num::add(draft_nll[k], polish_nll), S(0.5));
        }
      }
      vals.l_ys = static_cast<double>(loss_k[0].item());
      vals.l_yd = static_cast<double>(loss_k[1].item());
      vals.l_ym = static_cast<double>(loss_k[2].item());
      if (train_reports) {
        accumulate(loss_k[0], w.y_s);
        accumulate(loss_k[1], w.y_d);
        accumulate(loss_k[2], w.y_m);
      }
    }
  }

  out.total = have_total
                  ? total
                  : Var<S>::constant(num::Mat<S>::Zero(1, 1));
  return out;
}

}  // namespace msic::train
