#pragma once

#include <cstdint>
#include <vector>

#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"

namespace msic::eval {

/// Structure-free reference synthesizer: every code is an independent
/// Bernoulli draw at its overall per-visit marginal rate; record
/// lengths follow the empirical histogram. Matches the real corpus on
/// unigram statistics in expectation while carrying no co-occurrence
/// or longitudinal structure.
struct BernoulliBaseline {
  std::vector<double> rates[3];          // per-kind per-code visit rates
  std::vector<double> visit_count_hist;  // index i: P(record has i+1 visits)
  data::VocabSet vocabs;

  static BernoulliBaseline fit(const data::Corpus& train);

  /// `count` records named "BL......"; no reports.
  data::Corpus generate(int count, std::uint64_t seed) const;
};

}  // namespace msic::eval
