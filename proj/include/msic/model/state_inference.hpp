#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"
#include "msic/data/corpus.hpp"
#include "msic/data/vocab.hpp"
#include "msic/model/config.hpp"
#include "msic/nn/attention.hpp"
#include "msic/nn/gaussian.hpp"
#include "msic/nn/layers.hpp"
#include "msic/nn/params.hpp"
#include "msic/nn/transformer.hpp"

namespace msic::model {


using num::Var;

/// Contextual visit-history representations at one visit:
/// symptom view, diagnosis view conditioned on symptoms, and
/// medication view conditioned on both.
template <typename S>
struct ContextualReps {
  Var<S> s;  // (1, d)
  Var<S> d;  // (1, d)
  Var<S> m;  // (1, d)
};

/// Latent health state at one visit.
template <typename S>
struct HealthState {
  num::GaussianVar<S> prior;
  std::optional<num::GaussianVar<S>> posterior;  // absent at synthesis
  Var<S> z;  // (1, d_h) latent sample
  Var<S> h;  // (1, d_h) attention over z_1..z_t
  bool sampled_from_posterior = false;
};

/// Visit-history inference: per-kind event-set encoders, history
/// attention pools, the conditional combiners g_d / g_m, prior and
/// posterior Gaussian heads, and the latent-history attention f_attn.
template <typename S>
class StateInference {
 public:
  StateInference(num::ParamStore<S>& store, const ModelConfig& cfg,
                 const data::VocabSet& vocabs, Rng& rng)
      : cfg_(cfg),
        emb_s_(store, "state.emb.symptom", rng,
               static_cast<int>(vocabs.symptom.size()), cfg.hidden_dim),
        emb_d_(store, "state.emb.diagnosis", rng,
               static_cast<int>(vocabs.diagnosis.size()), cfg.hidden_dim),
        emb_m_(store, "state.emb.medication", rng,
               static_cast<int>(vocabs.medication.size()), cfg.hidden_dim),
        enc_s_(store, "state.enc.symptom", rng, cfg.hidden_dim,
               cfg.encoder_heads, cfg.ff_multiplier * cfg.hidden_dim,
               cfg.encoder_layers, /*max_positions=*/0),
        enc_d_(store, "state.enc.diagnosis", rng, cfg.hidden_dim,
               cfg.encoder_heads, cfg.ff_multiplier * cfg.hidden_dim,
               cfg.encoder_layers, /*max_positions=*/0),
        enc_m_(store, "state.enc.medication", rng, cfg.hidden_dim,
               cfg.encoder_heads, cfg.ff_multiplier * cfg.hidden_dim,
               cfg.encoder_layers, /*max_positions=*/0),
        g_d_(store, "state.g_d", rng, 2 * cfg.hidden_dim, cfg.hidden_dim,
             cfg.hidden_dim),
        g_m_(store, "state.g_m", rng, 3 * cfg.hidden_dim, cfg.hidden_dim,
             cfg.hidden_dim),
        prior_mu_(store, "state.prior.mu", rng, 2 * cfg.hidden_dim,
                  cfg.latent_dim),
        prior_lv_(store, "state.prior.lv", rng, 2 * cfg.hidden_dim,
                  cfg.latent_dim),
        post_mu_(store, "state.post.mu", rng, 3 * cfg.hidden_dim,
                 cfg.latent_dim),
        post_lv_(store, "state.post.lv", rng, 3 * cfg.hidden_dim,
                 cfg.latent_dim),
        f_attn_(store, "state.f_attn", rng, cfg.latent_dim, cfg.max_visits) {
    // History pools: positions sized for the optional initial-history slot.
    const int pool_len = cfg.max_visits + 1;
    if (cfg.share_g_attn) {
      pool_shared_.emplace(store, "state.pool.shared", rng, cfg.hidden_dim,
                           pool_len);
    } else {
      pool_s_.emplace(store, "state.pool.symptom", rng, cfg.hidden_dim,
                      pool_len);
      pool_d_.emplace(store, "state.pool.diagnosis", rng, cfg.hidden_dim,
                      pool_len);
      pool_m_.emplace(store, "state.pool.medication", rng, cfg.hidden_dim,
                      pool_len);
    }
    for (data::Kind k : {data::Kind::kSymptom, data::Kind::kDiagnosis,
                         data::Kind::kMedication}) {
      const int i = static_cast<int>(k);
      const std::string name = data::kind_name(k);
      empty_[i] = store.add("state.empty." + name,
                            num::embedding_init<S>(rng, 1, cfg.hidden_dim));
      if (cfg.initial_history_key) {
        h0_[i] = store.add("state.h0." + name,
                           num::embedding_init<S>(rng, 1, cfg.hidden_dim));
      }
    }
  }

  /// Permutation-invariant event-set embedding, shape (1, d).
  /// An empty set is represented by the learned empty-set embedding.
  Var<S> encode_set(data::Kind kind, const data::EventSet& set) const {
    const num::Embedding<S>& table = embedding_for(kind);
    Var<S> rows =
        set.empty() ? empty_[static_cast<int>(kind)]
                    : num::select_rows(table.table(), set.indices);
    return encoder_for(kind).forward(rows);
  }

  /// Symptom context: attention over per-visit symptom embeddings.
  Var<S> symptom_context(const std::vector<Var<S>>& hist_s) const {
    return pool_history(data::Kind::kSymptom, hist_s);
  }

  /// Diagnosis context conditioned on the symptom context via g_d.
  Var<S> diagnosis_context(const std::vector<Var<S>>& hist_d,
                           const Var<S>& es_ctx) const {
    Var<S> att = pool_history(data::Kind::kDiagnosis, hist_d);
    return g_d_.forward(num::concat_cols(att, es_ctx));
  }

  /// Medication context conditioned on both other contexts via g_m.
  Var<S> medication_context(const std::vector<Var<S>>& hist_m,
                            const Var<S>& es_ctx, const Var<S>& ed_ctx) const {
    Var<S> att = pool_history(data::Kind::kMedication, hist_m);
    return g_m_.forward(
        num::concat_cols(num::concat_cols(att, es_ctx), ed_ctx));
  }

  /// Contextual reps for the last visit of `history` (lists of per-visit
  /// set embeddings, oldest first). Under the multi-visit ablation only
  /// the final visit is attended to.
  ContextualReps<S> contextual(const std::vector<Var<S>>& hist_s,
                               const std::vector<Var<S>>& hist_d,
                               const std::vector<Var<S>>& hist_m) const {
    if (hist_s.empty() || hist_s.size() != hist_d.size() ||
        hist_s.size() != hist_m.size()) {
      throw DimensionError(
          "contextual: history lists must be non-empty and equal length");
    }
    ContextualReps<S> out;
    out.s = symptom_context(hist_s);
    out.d = diagnosis_context(hist_d, out.s);
    out.m = medication_context(hist_m, out.s, out.d);
    return out;
  }

  /// Prior N(mu, diag Sigma) from (symptom rep, diagnosis rep).
  num::GaussianVar<S> prior_params(const Var<S>& es, const Var<S>& ed) const {
    Var<S> in = num::concat_cols(es, ed);
    return {prior_mu_.forward(in),
            num::clamp(prior_lv_.forward(in), S(-10), S(10))};
  }

  /// Posterior from (symptom rep, diagnosis rep, medication rep).
  num::GaussianVar<S> posterior_params(const Var<S>& es, const Var<S>& ed,
                                       const Var<S>& em) const {
    Var<S> in = num::concat_cols(num::concat_cols(es, ed), em);
    return {post_mu_.forward(in),
            num::clamp(post_lv_.forward(in), S(-10), S(10))};
  }

  /// h_t = attention over latent samples z_1..z_t (query: latest).
  Var<S> compose_health_state(const std::vector<Var<S>>& zs) const {
    if (zs.empty()) throw DimensionError("compose_health_state: empty latent history");
    if (cfg_.ablate_multi_visit || zs.size() == 1) {
      return f_attn_.forward(zs.back());
    }
    Var<S> stack = zs.front();
    for (std::size_t i = 1; i < zs.size(); ++i) {
      stack = num::concat_rows(stack, zs[i]);
    }
    return f_attn_.forward(stack);
  }

  const ModelConfig& config() const { return cfg_; }
  const num::Embedding<S>& embedding_for(data::Kind k) const {
    switch (k) {
      case data::Kind::kSymptom: return emb_s_;
      case data::Kind::kDiagnosis: return emb_d_;
      case data::Kind::kMedication: return emb_m_;
      default: throw ParameterError("no event embedding for word kind");
    }
  }

 private:
  const num::Encoder<S>& encoder_for(data::Kind k) const {
    switch (k) {
      case data::Kind::kSymptom: return enc_s_;
      case data::Kind::kDiagnosis: return enc_d_;
      case data::Kind::kMedication: return enc_m_;
      default: throw ParameterError("no set encoder for word kind");
    }
  }

  const num::AttentionPool<S>& pool_for(data::Kind k) const {
    if (pool_shared_) return *pool_shared_;
    switch (k) {
      case data::Kind::kSymptom: return *pool_s_;
      case data::Kind::kDiagnosis: return *pool_d_;
      case data::Kind::kMedication: return *pool_m_;
      default: throw ParameterError("no history pool for word kind");
    }
  }

  /// Attention over per-visit embeddings; the learned initial-history
  /// embedding is prepended as an extra key/value so the query stays
  /// the latest visit. Under the multi-visit ablation only the latest
  /// visit (plus the initial-history slot) is attended to.
  Var<S> pool_history(data::Kind k, const std::vector<Var<S>>& hist) const {
    const std::size_t first = cfg_.ablate_multi_visit ? hist.size() - 1 : 0;
    Var<S> stack;
    bool have = false;
    if (cfg_.initial_history_key) {
      stack = h0_[static_cast<int>(k)];
      have = true;
    }
    for (std::size_t i = first; i < hist.size(); ++i) {
      stack = have ? num::concat_rows(stack, hist[i]) : hist[i];
      have = true;
    }
    return pool_for(k).forward(stack);
  }

  ModelConfig cfg_;
  num::Embedding<S> emb_s_, emb_d_, emb_m_;
  num::Encoder<S> enc_s_, enc_d_, enc_m_;
  num::Mlp2<S> g_d_, g_m_;
  num::Affine<S> prior_mu_, prior_lv_, post_mu_, post_lv_;
  num::AttentionPool<S> f_attn_;
  std::optional<num::AttentionPool<S>> pool_shared_, pool_s_, pool_d_, pool_m_;
  Var<S> empty_[3];
  Var<S> h0_[3];
};

}  // namespace msic::model
