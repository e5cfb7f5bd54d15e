#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/data/vocab.hpp"
#include "msic/model/config.hpp"
#include "msic/nn/layers.hpp"
#include "msic/nn/params.hpp"

namespace msic::model {


using num::Var;

/// Event decoders: per-code Bernoulli probabilities for the current
/// visit's medications and the next visit's symptoms and diagnoses.
template <typename S>
class EventSynthesis {
 public:
  EventSynthesis(num::ParamStore<S>& store, const ModelConfig& cfg,
                 const data::VocabSet& vocabs, Rng& rng)
      : f_s_(store, "events.f_s", rng, cfg.latent_dim, cfg.hidden_dim,
             static_cast<int>(vocabs.symptom.size())),
        f_d_(store, "events.f_d", rng, cfg.latent_dim + cfg.hidden_dim,
             cfg.hidden_dim, static_cast<int>(vocabs.diagnosis.size())),
        f_m_(store, "events.f_m", rng, cfg.latent_dim + 2 * cfg.hidden_dim,
             cfg.hidden_dim, static_cast<int>(vocabs.medication.size())) {}

  /// sigma(f_m(h_t + symptom rep + diagnosis rep)), shape (1, |M|).
  Var<S> predict_medications(const Var<S>& h, const Var<S>& es,
                             const Var<S>& ed) const {
    return num::sigmoid(
        f_m_.forward(num::concat_cols(num::concat_cols(h, es), ed)));
  }

  /// sigma(f_s(h_t)), shape (1, |S|): next-visit symptom probabilities.
  Var<S> predict_next_symptoms(const Var<S>& h) const {
    return num::sigmoid(f_s_.forward(h));
  }

  /// sigma(f_d(h_t + next symptom rep)), shape (1, |D|).
  Var<S> predict_next_diagnoses(const Var<S>& h, const Var<S>& es_next) const {
    return num::sigmoid(f_d_.forward(num::concat_cols(h, es_next)));
  }

 private:
  num::Mlp2<S> f_s_, f_d_, f_m_;
};

enum class SamplingStrategy { kBernoulli, kThreshold, kTopK };

struct SamplingConfig {
  SamplingStrategy strategy = SamplingStrategy::kBernoulli;
  double threshold = 0.5;  // for kThreshold
  int top_k = 1;           // for kTopK

  void validate(int vocab_size) const {
    if (threshold < 0.0 || threshold > 1.0) {
      throw ParameterError("sampling threshold must lie in [0, 1]");
    }
    if (strategy == SamplingStrategy::kTopK &&
        (top_k < 1 || top_k > vocab_size)) {
      throw ParameterError("top_k must lie in [1, vocab size]");
    }
  }
};

inline SamplingStrategy sampling_strategy_from_name(const std::string& name) {
  if (name == "bernoulli") return SamplingStrategy::kBernoulli;
  if (name == "threshold") return SamplingStrategy::kThreshold;
  if (name == "top_k" || name == "top-k") return SamplingStrategy::kTopK;
  throw ConfigError("unknown sampling strategy: " + name);
}

inline const char* sampling_strategy_name(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::kBernoulli: return "bernoulli";
    case SamplingStrategy::kThreshold: return "threshold";
    default: return "top_k";
  }
}

/// Turns a (1, V) probability row into an event set.
///  - bernoulli: one independent draw per code, ascending index order;
///  - threshold: keep codes with p >= threshold (no randomness);
///  - top_k: k highest-probability codes, ties to the lower index.
template <typename S>
data::EventSet sample_event_set(const num::Mat<S>& probs, data::Kind kind,
                                const SamplingConfig& cfg, Rng& rng) {
  if (probs.rows() != 1) {
    throw DimensionError("sample_event_set expects a single probability row");
  }
  const int v = static_cast<int>(probs.cols());
  cfg.validate(v);
  std::vector<int> picked;
  switch (cfg.strategy) {
    case SamplingStrategy::kBernoulli:
      for (int i = 0; i < v; ++i) {
        if (rng.bernoulli(static_cast<double>(probs(0, i)))) picked.push_back(i);
      }
      break;
    case SamplingStrategy::kThreshold:
      for (int i = 0; i < v; ++i) {
        if (static_cast<double>(probs(0, i)) >= cfg.threshold) picked.push_back(i);
      }
      break;
    case SamplingStrategy::kTopK: {
      std::vector<int> order(static_cast<std::size_t>(v));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (probs(0, a) != probs(0, b)) return probs(0, a) > probs(0, b);
        return a < b;
      });
      picked.assign(order.begin(), order.begin() + cfg.top_k);
      break;
    }
  }
  return data::EventSet::from_indices(kind, picked, v);
}

}  // namespace msic::model
