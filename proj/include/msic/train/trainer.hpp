#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msic/core/log.hpp"
#include "msic/core/rng.hpp"
#include "msic/model/model.hpp"
#include "msic/nn/adam.hpp"
#include "msic/train/config.hpp"
#include "msic/train/losses.hpp"

namespace msic::train {

struct EpochSummary {
  int epoch = 0;
  double loss_total = 0.0;  // weighted, averaged over visits
  std::map<std::string, double> terms;  // unweighted term means
  double learning_rate = 0.0;  // last step's rate
  double grad_norm = 0.0;      // last step's pre-clip norm
};

/// Linear warm-up over `warmup_fraction` of all steps, then linear
/// decay towards zero. `step` is zero-based.
inline double lr_schedule(double base, double warmup_fraction,
                          std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return base;
  std::size_t warm = static_cast<std::size_t>(
      warmup_fraction * static_cast<double>(total_steps));
  if (warm > 0 && step < warm) {
    return base * static_cast<double>(step + 1) / static_cast<double>(warm);
  }
  if (warm >= total_steps) return base;
  return base * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warm);
}

/// Teacher-forced training: batches of whole patients, loss averaged
/// over the visits in the batch, event-only epochs first, report
/// branches joining afterwards, paragraph encoder frozen once its
/// joint warm-up epochs have run. Per epoch one JSONL telemetry line
/// is written: {"epoch", "loss_total", "loss_terms", "learning_rate",
/// "grad_norm", "kl_probe"}.
template <typename S>
class Trainer {
 public:
  Trainer(model::MsicModel<S>& m, const TrainConfig& cfg)
      : model_(m), cfg_(cfg) {
    cfg_.validate();
    adam_.init(m.params());
  }

  std::vector<EpochSummary> fit(const data::Corpus& train,
                                std::ostream* telemetry) {
    if (train.records.empty()) {
      throw ValidationError("training corpus has no records");
    }
    const std::size_t n = train.records.size();
    const std::size_t batches_per_epoch =
        (n + static_cast<std::size_t>(cfg_.batch_size) - 1) /
        static_cast<std::size_t>(cfg_.batch_size);
    const std::size_t total_steps =
        batches_per_epoch * static_cast<std::size_t>(cfg_.epochs);

    Rng master(cfg_.seed);
    Rng shuffle_rng = master.fork(1);
    Rng noise_rng = master.fork(2);

    std::vector<EpochSummary> summaries;
    std::size_t step = 0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      const ReportMode mode =
          epoch > cfg_.event_only_epochs
              ? ReportMode::kTrain
              : (cfg_.telemetry_reports ? ReportMode::kTelemetry
                                        : ReportMode::kOff);
      const bool freeze_encoder =
          epoch > cfg_.event_only_epochs + cfg_.encoder_warmup_epochs;
      model_.params().set_frozen("report.encoder", freeze_encoder);

      for (std::size_t i = n; i > 1; --i) {
        std::size_t j =
            static_cast<std::size_t>(shuffle_rng.uniform_int(i));
        std::swap(order[i - 1], order[j]);
      }

      EpochSummary summary;
      summary.epoch = epoch;
      double epoch_weighted = 0.0;
      std::size_t epoch_visits = 0;
      std::map<std::string, std::pair<double, std::size_t>> term_acc;
      KlProbe probe;

      for (std::size_t b = 0; b < batches_per_epoch; ++b) {
        const std::size_t begin = b * cfg_.batch_size;
        const std::size_t end = std::min(n, begin + cfg_.batch_size);
        model_.params().zero_grad();

        Var<S> batch_total;
        bool have = false;
        std::size_t batch_visits = 0;
        for (std::size_t i = begin; i < end; ++i) {
          const data::PatientRecord& rec = train.records[order[i]];
          PatientLoss<S> pl = patient_loss(model_, rec, cfg_.weights,
                                           mode, noise_rng);
          check_finite(pl, rec.patient_id, epoch, b);
          batch_total = have ? num::add(batch_total, pl.total) : pl.total;
          have = true;
          batch_visits += rec.visits.size();
          epoch_visits += rec.visits.size();
          for (const VisitLossValues& v : pl.visits) {
            epoch_weighted += v.weighted_total(cfg_.weights);
            accumulate_terms(term_acc, v);
          }
          if (b == 0 && i == begin && pl.probe.present) probe = pl.probe;
        }
        Var<S> mean_loss = num::scale(
            batch_total, static_cast<S>(1.0 / static_cast<double>(
                                            batch_visits)));
        mean_loss.backward();
        summary.grad_norm =
            num::clip_gradients(model_.params(), cfg_.grad_clip);
        summary.learning_rate = lr_schedule(
            cfg_.learning_rate, cfg_.warmup_fraction, step, total_steps);
        num::adam_step(model_.params(), adam_,
                       static_cast<S>(summary.learning_rate),
                       static_cast<S>(cfg_.adam_beta1),
                       static_cast<S>(cfg_.adam_beta2),
                       static_cast<S>(cfg_.adam_eps));
        ++step;
      }

      summary.loss_total =
          epoch_weighted / static_cast<double>(epoch_visits);
      for (const auto& [name, acc] : term_acc) {
        summary.terms[name] =
            acc.second == 0 ? 0.0
                            : acc.first / static_cast<double>(acc.second);
      }
      log_info("epoch " + std::to_string(epoch) + " loss " +
               std::to_string(summary.loss_total));
      if (telemetry) write_telemetry(*telemetry, summary, probe);
      summaries.push_back(std::move(summary));
    }
    return summaries;
  }

 private:
  static void accumulate_terms(
      std::map<std::string, std::pair<double, std::size_t>>& acc,
      const VisitLossValues& v) {
    auto add = [&acc](const char* name, double value) {
      acc[name].first += value;
      acc[name].second += 1;
    };
    add("m", v.l_m);
    if (v.has_next) {
      add("s", v.l_s);
      add("d", v.l_d);
    }
    if (v.has_kl) add("kl", v.l_kl);
    if (v.has_reports) {
      add("y_s", v.l_ys);
      add("y_d", v.l_yd);
      add("y_m", v.l_ym);
    }
  }

  void check_finite(const PatientLoss<S>& pl, const std::string& patient_id,
                    int epoch, std::size_t batch) const {
    const struct {
      const char* name;
      double value;
      bool present;
    } probes[] = {
        {"total", static_cast<double>(pl.total.item()), true},
    };
    auto fail = [&](const char* term) {
      throw NumericError(std::string("non-finite ") + term +
                         " loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batch + 1) +
                         ", patient " + patient_id);
    };
    for (const VisitLossValues& v : pl.visits) {
      if (!std::isfinite(v.l_m)) fail("medication");
      if (v.has_next &&
          (!std::isfinite(v.l_s) || !std::isfinite(v.l_d))) {
        fail(!std::isfinite(v.l_s) ? "symptom" : "diagnosis");
      }
      if (v.has_kl && !std::isfinite(v.l_kl)) fail("kl");
      if (v.has_reports && (!std::isfinite(v.l_ys) ||
                            !std::isfinite(v.l_yd) ||
                            !std::isfinite(v.l_ym))) {
        fail("report");
      }
    }
    for (const auto& p : probes) {
      if (p.present && !std::isfinite(p.value)) fail(p.name);
    }
  }

  static void write_telemetry(std::ostream& out, const EpochSummary& s,
                              const KlProbe& probe) {
    nlohmann::ordered_json line;
    line["epoch"] = s.epoch;
    line["loss_total"] = s.loss_total;
    nlohmann::ordered_json terms;
    for (const auto& [name, value] : s.terms) terms[name] = value;
    line["loss_terms"] = std::move(terms);
    line["learning_rate"] = s.learning_rate;
    line["grad_norm"] = s.grad_norm;
    if (probe.present) {
      nlohmann::ordered_json kp;
      kp["mu_q"] = probe.mu_q;
      kp["lv_q"] = probe.lv_q;
      kp["mu_p"] = probe.mu_p;
      kp["lv_p"] = probe.lv_p;
      kp["kl"] = probe.kl;
      line["kl_probe"] = std::move(kp);
    }
    out << line.dump() << "\n";
  }

  model::MsicModel<S>& model_;
  TrainConfig cfg_;
  num::AdamState<S> adam_;
};

}  // namespace msic::train
