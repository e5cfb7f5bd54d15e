#pragma once

#include <cstdint>

#include "msic/core/errors.hpp"

namespace msic::train {

/// Loss-term weights (lambdas). Defaults follow the published setup.
struct LossWeights {
  double s = 1.0;     // next-visit symptoms
  double d = 1.0;     // next-visit diagnoses
  double m = 1.0;     // current-visit medications
  double y_s = 5.0;   // chief-complaint paragraphs
  double y_d = 1.0;   // present-illness paragraphs
  double y_m = 2.0;   // prescription paragraphs
  double kl = 1e-4;   // posterior/prior divergence
};

struct TrainConfig {
  int epochs = 20;
  int event_only_epochs = 5;      // report branch idle for these epochs
  int encoder_warmup_epochs = 1;  // paragraph-encoder joint epochs, then frozen
  int batch_size = 16;            // whole patients per step
  double learning_rate = 1e-5;
  double warmup_fraction = 0.1;   // linear warm-up share of total steps
  double grad_clip = 5.0;         // global gradient-norm ceiling
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Report losses are measured (forward-only) during event-only epochs
  // so the telemetry total stays comparable across the stage boundary;
  // disable to skip that cost when the diagnostics are not needed.
  bool telemetry_reports = true;
  std::uint64_t seed = 1;
  LossWeights weights;

  void validate() const {
    if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
    if (event_only_epochs < 0 || event_only_epochs > epochs) {
      throw ConfigError(
          "train.event_only_epochs must lie in [0, train.epochs]");
    }
    if (encoder_warmup_epochs < 0) {
      throw ConfigError("train.encoder_warmup_epochs must be >= 0");
    }
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (learning_rate <= 0) {
      throw ConfigError("train.learning_rate must be positive");
    }
    if (warmup_fraction < 0 || warmup_fraction > 1) {
      throw ConfigError("train.warmup_fraction must lie in [0, 1]");
    }
    if (grad_clip <= 0) throw ConfigError("train.grad_clip must be positive");
    if (weights.s < 0 || weights.d < 0 || weights.m < 0 || weights.y_s < 0 ||
        weights.y_d < 0 || weights.y_m < 0 || weights.kl < 0) {
      throw ConfigError("loss weights must be non-negative");
    }
  }
};

}  // namespace msic::train
