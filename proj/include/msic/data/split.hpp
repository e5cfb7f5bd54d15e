#pragma once

#include <array>
#include <cstdint>

#include "msic/data/corpus.hpp"

namespace msic::data {

struct SplitResult {
  Corpus train;
  Corpus valid;
  Corpus test;
};

/// Patient-level split. Sizes are floor(N * ratio) for valid and test with
/// the remainder going to train; assignment is a seeded shuffle, and each
/// split preserves the original corpus record order.
SplitResult split_corpus(const Corpus& corpus,
                         const std::array<double, 3>& ratios,
                         std::uint64_t seed);

}  // namespace msic::data
