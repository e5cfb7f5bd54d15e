#include "msic/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msic/core/rng.hpp"

namespace msic::data {

SplitResult split_corpus(const Corpus& corpus,
                         const std::array<double, 3>& ratios,
                         std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r <= 0.0) throw ValidationError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
  const std::size_t n = corpus.records.size();
  if (n < 3) {
    throw ValidationError("cannot split " + std::to_string(n) +
                          " patients into 3 parts");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  msic::Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }

  const auto n_valid = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios[1]));
  const auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios[2]));
  const std::size_t n_train = n - n_valid - n_test;

  std::vector<int> assignment(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      assignment[order[i]] = 0;
    } else if (i < n_train + n_valid) {
      assignment[order[i]] = 1;
    } else {
      assignment[order[i]] = 2;
    }
  }

  SplitResult result;
  result.train.vocabs = corpus.vocabs;
  result.valid.vocabs = corpus.vocabs;
  result.test.vocabs = corpus.vocabs;
  for (std::size_t i = 0; i < n; ++i) {
    switch (assignment[i]) {
      case 0:
        result.train.records.push_back(corpus.records[i]);
        break;
      case 1:
        result.valid.records.push_back(corpus.records[i]);
        break;
      default:
        result.test.records.push_back(corpus.records[i]);
        break;
    }
  }
  return result;
}

}  // namespace msic::data
