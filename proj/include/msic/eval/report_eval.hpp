#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/eval/metric_value.hpp"
#include "msic/eval/textgen.hpp"
#include "msic/model/synthesis.hpp"

namespace msic::eval {

/// Mean per-paragraph scores for both deliberation phases.
struct ReportEvalResult {
  MetricValue draft_bleu1, draft_bleu2, polish_bleu1, polish_bleu2;
  MetricValue draft_rouge1, draft_rouge2, draft_rouge_l;
  MetricValue polish_rouge1, polish_rouge2, polish_rouge_l;
  std::size_t paragraphs = 0;  // reference paragraphs compared
};

namespace detail {

class MeanAccumulator {
 public:
  void add(const MetricValue& v) {
    if (v.has_value()) {
      sum_ += *v.value;
      ++count_;
    }
  }
  MetricValue result() const {
    if (count_ == 0) return MetricValue::null("no scorable paragraphs");
    return MetricValue::ok(sum_ / static_cast<double>(count_));
  }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace detail

/// Replays each record through the synthesis chain: after the events of
/// visit t are pushed, both deliberation phases regenerate the visit's
/// report, and each paragraph is scored against the reference paragraph.
/// Visits without reports are skipped; the means cover every reference
/// paragraph (empty references score as null and drop out).
template <typename S>
ReportEvalResult report_eval(const model::MsicModel<S>& m,
                             const data::Corpus& corpus,
                             const model::SynthesisOptions& opts,
                             std::uint64_t seed) {
  detail::MeanAccumulator b1d, b2d, b1p, b2p;
  detail::MeanAccumulator r1d, r2d, rld, r1p, r2p, rlp;
  ReportEvalResult out;

  Rng master(seed);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const data::PatientRecord& rec = corpus.records[i];
    Rng rng = master.fork(i);
    model::SynthesisChain<S> chain(m);
    for (const data::Visit& visit : rec.visits) {
      chain.push_observed(visit, rng);
      if (!visit.report.has_value()) continue;
      model::GeneratedReport gen = chain.generate_report(opts, rng);
      for (data::Kind k :
           {data::Kind::kSymptom, data::Kind::kDiagnosis,
            data::Kind::kMedication}) {
        const std::vector<std::string>& ref = visit.report->paragraph(k);
        const std::vector<std::string>& draft = gen.draft.paragraph(k);
        const std::vector<std::string>& polish = gen.polish.paragraph(k);
        ++out.paragraphs;
        b1d.add(bleu(draft, ref, 1));
        b2d.add(bleu(draft, ref, 2));
        b1p.add(bleu(polish, ref, 1));
        b2p.add(bleu(polish, ref, 2));
        RougeScores rd = rouge(draft, ref);
        RougeScores rp = rouge(polish, ref);
        r1d.add(rd.rouge1);
        r2d.add(rd.rouge2);
        rld.add(rd.rouge_l);
        r1p.add(rp.rouge1);
        r2p.add(rp.rouge2);
        rlp.add(rp.rouge_l);
      }
    }
  }

  out.draft_bleu1 = b1d.result();
  out.draft_bleu2 = b2d.result();
  out.polish_bleu1 = b1p.result();
  out.polish_bleu2 = b2p.result();
  out.draft_rouge1 = r1d.result();
  out.draft_rouge2 = r2d.result();
  out.draft_rouge_l = rld.result();
  out.polish_rouge1 = r1p.result();
  out.polish_rouge2 = r2p.result();
  out.polish_rouge_l = rlp.result();
  return out;
}

}  // namespace msic::eval
