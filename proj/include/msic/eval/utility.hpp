#pragma once

#include "msic/core/errors.hpp"
#include "msic/data/corpus.hpp"

namespace msic::eval {

/// Downstream-task probe: a single-layer sigmoid classifier predicting
/// the next visit's medication set from the current visit's bag of
/// events (symptoms + diagnoses + medications, multi-hot).
struct UtilityConfig {
  int iterations = 300;        // full-batch gradient steps
  double learning_rate = 1.0;  // plain gradient descent on mean BCE
  double threshold = 0.5;      // decision threshold per code

  void validate() const {
    if (iterations < 1) throw ConfigError("utility.iterations must be >= 1");
    if (learning_rate <= 0) {
      throw ConfigError("utility.learning_rate must be positive");
    }
    if (threshold < 0 || threshold > 1) {
      throw ConfigError("utility.threshold must lie in [0, 1]");
    }
  }
};

struct UtilityResult {
  double jaccard = 0.0;   // sample-averaged; empty-vs-empty pairs score 0
  double micro_f1 = 0.0;  // aggregated over all (pair, code) decisions
  std::size_t train_pairs = 0;
  std::size_t eval_pairs = 0;
};

/// Trains on consecutive-visit pairs of `train_on` (zero-initialized
/// weights, deterministic) and scores predictions on the pairs of
/// `eval_on`. Throws ParameterError when either corpus contributes no
/// visit pairs.
UtilityResult utility_eval(const data::Corpus& train_on,
                           const data::Corpus& eval_on,
                           const UtilityConfig& config);

}  // namespace msic::eval
