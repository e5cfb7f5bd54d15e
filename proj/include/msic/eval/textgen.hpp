#pragma once

#include <string>
#include <vector>

#include "msic/eval/metric_value.hpp"

namespace msic::eval {

/// BLEU-N with brevity penalty. Modified n-gram precisions use add-1
/// smoothing for orders >= 2; a zero unigram precision scores 0. An
/// empty reference yields a null result; an empty candidate against a
/// non-empty reference scores 0.
MetricValue bleu(const std::vector<std::string>& candidate,
                 const std::vector<std::string>& reference, int max_n);

struct RougeScores {
  MetricValue rouge1;
  MetricValue rouge2;
  MetricValue rouge_l;
};

/// ROUGE-1/2 and ROUGE-L F-measures. An empty reference yields null
/// scores; an empty candidate against a non-empty reference scores 0.
RougeScores rouge(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference);

}  // namespace msic::eval
