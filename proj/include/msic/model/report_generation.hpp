#pragma once

#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/data/vocab.hpp"
#include "msic/model/config.hpp"
#include "msic/model/state_inference.hpp"
#include "msic/nn/layers.hpp"
#include "msic/nn/params.hpp"
#include "msic/nn/transformer.hpp"

namespace msic::model {

/// Deliberative report generation: three prompt-conditioned decoders
/// (chief complaint / present illness / prescription) sharing one word
/// embedding table, plus a paragraph encoder used when each generator
/// polishes its draft against the other two generators' drafts.
template <typename S>
class ReportGeneration {
 public:
  ReportGeneration(num::ParamStore<S>& store, const ModelConfig& cfg,
                   const data::Vocabulary& word_vocab, Rng& rng)
      : cfg_(cfg),
        words_(store, "report.words", rng,
               static_cast<int>(word_vocab.size()), cfg.hidden_dim),
        h_proj_(store, "report.h_proj", rng, cfg.latent_dim, cfg.hidden_dim),
        encoder_(store, "report.encoder", rng, cfg.hidden_dim,
                 cfg.encoder_heads, cfg.ff_multiplier * cfg.hidden_dim,
                 cfg.encoder_layers,
                 /*max_positions=*/cfg.max_report_len + 1),
        bos_(word_vocab.require(data::kBosToken)),
        eos_(word_vocab.require(data::kEosToken)),
        empty_(word_vocab.require(data::kEmptyToken)) {
    const char* names[3] = {"symptom", "diagnosis", "medication"};
    for (int i = 0; i < 3; ++i) {
      dec_[i] = num::Decoder<S>(
          store, std::string("report.dec.") + names[i], rng, cfg.hidden_dim,
          cfg.decoder_heads, cfg.ff_multiplier * cfg.hidden_dim,
          cfg.decoder_layers, static_cast<Eigen::Index>(word_vocab.size()),
          cfg.max_report_len, /*max_prompts=*/4);
    }
  }

  int bos_id() const { return bos_; }
  int eos_id() const { return eos_; }
  int empty_id() const { return empty_; }
  const num::Embedding<S>& words() const { return words_; }

  /// Health state projected into prompt space, shape (1, d).
  Var<S> project_state(const Var<S>& h) const { return h_proj_.forward(h); }

  /// Draft prompt rows for the generator of `kind`:
  ///   chief complaint:   [h', symptom rep]
  ///   present illness:   [h', symptom rep, diagnosis rep]
  ///   prescription:      [h', symptom rep, diagnosis rep, medication rep]
  Var<S> draft_prompts(data::Kind kind, const Var<S>& h_projected,
                       const ContextualReps<S>& reps) const {
    Var<S> rows = num::concat_rows(h_projected, reps.s);
    if (kind == data::Kind::kSymptom) return rows;
    rows = num::concat_rows(rows, reps.d);
    if (kind == data::Kind::kDiagnosis) return rows;
    if (kind == data::Kind::kMedication) return num::concat_rows(rows, reps.m);
    throw ParameterError("draft_prompts: no generator for word kind");
  }

  /// Polish prompt rows: the generator's own draft is excluded, the
  /// other two paragraphs' encodings are attended to alongside h'.
  Var<S> polish_prompts(data::Kind kind, const Var<S>& h_projected,
                        const Var<S>& enc_s, const Var<S>& enc_d,
                        const Var<S>& enc_m) const {
    switch (kind) {
      case data::Kind::kSymptom:
        return num::concat_rows(num::concat_rows(h_projected, enc_d), enc_m);
      case data::Kind::kDiagnosis:
        return num::concat_rows(num::concat_rows(h_projected, enc_s), enc_m);
      case data::Kind::kMedication:
        return num::concat_rows(num::concat_rows(h_projected, enc_s), enc_d);
      default:
        throw ParameterError("polish_prompts: no generator for word kind");
    }
  }

  /// Paragraph embedding (1, d); an empty paragraph is encoded as the
  /// single <empty> token.
  Var<S> encode_paragraph(const std::vector<int>& token_ids) const {
    std::vector<int> ids = truncate(token_ids);
    if (ids.empty()) ids.push_back(empty_);
    return encoder_.forward(num::select_rows(words_.table(), ids));
  }

  /// Teacher-forced summed NLL of `gold` under the generator of `kind`
  /// conditioned on `prompts`. Gold tokens beyond max_report_len are
  /// dropped; the model is trained to emit <eos> after the paragraph.
  Var<S> paragraph_nll(data::Kind kind, const Var<S>& prompts,
                       const std::vector<int>& gold) const {
    std::vector<int> trunc = truncate(gold);
    std::vector<int> input;
    input.reserve(trunc.size() + 1);
    input.push_back(bos_);
    input.insert(input.end(), trunc.begin(), trunc.end());
    std::vector<int> target = trunc;
    target.push_back(eos_);
    Var<S> rows = num::select_rows(words_.table(), input);
    Var<S> logits = decoder_for(kind).forward_train(rows, prompts);
    return num::lm_nll_sum(logits, target);
  }

  /// Greedy decode (no graph); returns tokens without <bos>/<eos>.
  std::vector<int> decode_greedy(data::Kind kind,
                                 const num::Mat<S>& prompt_values) const {
    return decoder_for(kind).greedy_decode(words_.table().value(),
                                           prompt_values, bos_, eos_,
                                           cfg_.max_report_len);
  }

  /// Temperature-sampled decode; deterministic given the rng state.
  std::vector<int> decode_sample(data::Kind kind,
                                 const num::Mat<S>& prompt_values,
                                 double temperature, Rng& rng) const {
    return decoder_for(kind).sample_decode(words_.table().value(),
                                           prompt_values, bos_, eos_,
                                           cfg_.max_report_len, temperature,
                                           rng);
  }

 private:
  std::vector<int> truncate(const std::vector<int>& ids) const {
    const std::size_t cap = static_cast<std::size_t>(cfg_.max_report_len);
    if (ids.size() <= cap) return ids;
    return std::vector<int>(ids.begin(), ids.begin() + cap);
  }

  const num::Decoder<S>& decoder_for(data::Kind kind) const {
    const int i = static_cast<int>(kind);
    if (i < 0 || i > 2) throw ParameterError("no report generator for kind");
    return dec_[i];
  }

  ModelConfig cfg_;
  num::Embedding<S> words_;
  num::Affine<S> h_proj_;
  num::Encoder<S> encoder_;
  num::Decoder<S> dec_[3];
  int bos_, eos_, empty_;
};

}  // namespace msic::model
