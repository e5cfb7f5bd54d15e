#include "msic/eval/textgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "msic/core/errors.hpp"

namespace msic::eval {
namespace {

using Tokens = std::vector<std::string>;

std::map<std::string, int> ngram_counts(const Tokens& tokens, int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) key += '\x1f' + tokens[i + j];
    counts[key] += 1;
  }
  return counts;
}

/// Clipped overlap and candidate total for order-n grams.
std::pair<int, int> clipped_overlap(const Tokens& cand, const Tokens& ref,
                                    int n) {
  std::map<std::string, int> c = ngram_counts(cand, n);
  std::map<std::string, int> r = ngram_counts(ref, n);
  int clipped = 0, total = 0;
  for (const auto& [key, count] : c) {
    total += count;
    auto it = r.find(key);
    if (it != r.end()) clipped += std::min(count, it->second);
  }
  return {clipped, total};
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

MetricValue f_measure(double overlap, double cand_total, double ref_total) {
  if (cand_total <= 0.0 || overlap <= 0.0) return MetricValue::ok(0.0);
  double p = overlap / cand_total;
  double r = overlap / ref_total;
  return MetricValue::ok(2.0 * p * r / (p + r));
}

}  // namespace

MetricValue bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  if (max_n < 1) throw ParameterError("bleu: max_n must be >= 1");
  if (reference.empty()) return MetricValue::null("empty reference");
  if (candidate.empty()) return MetricValue::ok(0.0);
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    auto [clipped, total] = clipped_overlap(candidate, reference, n);
    double p;
    if (n == 1) {
      if (clipped == 0) return MetricValue::ok(0.0);
      p = static_cast<double>(clipped) / static_cast<double>(total);
    } else {
      p = (static_cast<double>(clipped) + 1.0) /
          (static_cast<double>(total) + 1.0);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return MetricValue::ok(bp * std::exp(log_sum / max_n));
}

RougeScores rouge(const Tokens& candidate, const Tokens& reference) {
  if (reference.empty()) {
    return {MetricValue::null("empty reference"),
            MetricValue::null("empty reference"),
            MetricValue::null("empty reference")};
  }
  RougeScores out;
  for (int n = 1; n <= 2; ++n) {
    auto [clipped, cand_total] = clipped_overlap(candidate, reference, n);
    int ref_total = std::max(0, static_cast<int>(reference.size()) - n + 1);
    MetricValue score =
        ref_total == 0
            ? MetricValue::ok(0.0)
            : f_measure(clipped, cand_total, ref_total);
    (n == 1 ? out.rouge1 : out.rouge2) = score;
  }
  std::size_t lcs = lcs_length(candidate, reference);
  out.rouge_l = f_measure(static_cast<double>(lcs),
                          static_cast<double>(candidate.size()),
                          static_cast<double>(reference.size()));
  return out;
}

}  // namespace msic::eval
