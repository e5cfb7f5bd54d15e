#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/nn/attention.hpp"
#include "msic/nn/layers.hpp"
#include "msic/nn/params.hpp"

namespace msic::num {

namespace raw {
// Plain-Eigen mirrors of the graph layers, used by the autoregressive decode
// path. They read parameter values directly; a unit test pins agreement with
// the graph forward pass.

template <typename S>
Mat<S> affine(const Mat<S>& x, const Affine<S>& layer) {
  Mat<S> y = x * layer.weight().value();
  if (layer.has_bias()) {
    y.rowwise() += Eigen::RowVector<S, Eigen::Dynamic>(
        layer.bias().value().row(0));
  }
  return y;
}

template <typename S>
Mat<S> layer_norm(const Mat<S>& x, const LayerNorm<S>& layer,
                  S eps = S(1e-5)) {
  Mat<S> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mu = x.row(r).mean();
    Eigen::Array<S, 1, Eigen::Dynamic> centered = x.row(r).array() - mu;
    const S var = centered.square().mean();
    out.row(r) = (centered / std::sqrt(var + eps)).matrix();
  }
  out = (out.array().rowwise() * layer.gamma().value().row(0).array())
            .matrix();
  out.rowwise() +=
      Eigen::RowVector<S, Eigen::Dynamic>(layer.beta().value().row(0));
  return out;
}

template <typename S>
Mat<S> softmax(const Mat<S>& x) {
  Mat<S> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mx = x.row(r).maxCoeff();
    Eigen::Array<S, 1, Eigen::Dynamic> e = (x.row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return out;
}

template <typename S>
Mat<S> mlp2(const Mat<S>& x, const Mlp2<S>& layer) {
  Mat<S> h = affine(x, layer.fc1());
  h = h.array().tanh().matrix();
  return affine(h, layer.fc2());
}

/// Attention of a single query row over cached keys/values, multi-head.
template <typename S>
Mat<S> attend_cached(const Mat<S>& q, const Mat<S>& keys, const Mat<S>& values,
                     Eigen::Index heads) {
  const Eigen::Index dh = q.cols() / heads;
  const S inv_sqrt = S(1) / static_cast<S>(std::sqrt(double(dh)));
  Mat<S> out(1, q.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    Mat<S> scores = q.middleCols(h * dh, dh) *
                    keys.middleCols(h * dh, dh).transpose() * inv_sqrt;
    Mat<S> attn = softmax(scores);
    out.middleCols(h * dh, dh) = attn * values.middleCols(h * dh, dh);
  }
  return out;
}

}  // namespace raw

/// Post-LN transformer encoder block: self-attention then feed-forward, each
/// wrapped in residual + layer norm.
template <typename S>
class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(ParamStore<S>& store, const std::string& prefix, Rng& rng,
               Eigen::Index dim, Eigen::Index heads, Eigen::Index ff_dim)
      : attn_(store, prefix + ".attn", rng, dim, heads),
        ff_(store, prefix + ".ff", rng, dim, ff_dim, dim),
        ln1_(store, prefix + ".ln1", dim),
        ln2_(store, prefix + ".ln2", dim) {}

  Var<S> forward(const Var<S>& x) const {
    Var<S> a = ln1_.forward(add(x, attn_.forward(x, x, false)));
    return ln2_.forward(add(a, ff_.forward(a)));
  }

 private:
  MultiHeadAttention<S> attn_;
  Mlp2<S> ff_;
  LayerNorm<S> ln1_;
  LayerNorm<S> ln2_;
};

/// Stack of encoder blocks with mean pooling to a single row. Position
/// embeddings are optional: event-set encoders omit them (permutation
/// invariance over the set), the paragraph encoder uses them.
template <typename S>
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamStore<S>& store, const std::string& prefix, Rng& rng,
          Eigen::Index dim, Eigen::Index heads, Eigen::Index ff_dim,
          Eigen::Index layers, Eigen::Index max_positions) {
    if (max_positions > 0) {
      pos_ = store.add(prefix + ".pos", zeros<S>(max_positions, dim));
      has_pos_ = true;
    }
    for (Eigen::Index l = 0; l < layers; ++l) {
      blocks_.emplace_back(store, prefix + ".block" + std::to_string(l), rng,
                           dim, heads, ff_dim);
    }
  }

  /// rows: (n, d), n >= 1 -> pooled (1, d).
  Var<S> forward(const Var<S>& rows) const {
    if (rows.rows() < 1) throw ValidationError("encoder: empty input");
    Var<S> x = rows;
    if (has_pos_) {
      std::vector<int> positions(static_cast<std::size_t>(rows.rows()));
      const int cap = static_cast<int>(pos_.rows()) - 1;
      for (std::size_t i = 0; i < positions.size(); ++i) {
        positions[i] = static_cast<int>(i) > cap ? cap : static_cast<int>(i);
      }
      x = add(x, select_rows(pos_, positions));
    }
    for (const auto& block : blocks_) x = block.forward(x);
    return mean_rows(x);
  }

 private:
  std::vector<EncoderBlock<S>> blocks_;
  Var<S> pos_;
  bool has_pos_ = false;
};

/// Post-LN decoder layer: causal self-attention, cross-attention over the
/// prompt memory, then feed-forward.
template <typename S>
class DecoderLayer {
 public:
  DecoderLayer() = default;
  DecoderLayer(ParamStore<S>& store, const std::string& prefix, Rng& rng,
               Eigen::Index dim, Eigen::Index heads, Eigen::Index ff_dim)
      : self_attn_(store, prefix + ".self", rng, dim, heads),
        cross_attn_(store, prefix + ".cross", rng, dim, heads),
        ff_(store, prefix + ".ff", rng, dim, ff_dim, dim),
        ln1_(store, prefix + ".ln1", dim),
        ln2_(store, prefix + ".ln2", dim),
        ln3_(store, prefix + ".ln3", dim) {}

  Var<S> forward(const Var<S>& x, const Var<S>& memory) const {
    Var<S> a = ln1_.forward(add(x, self_attn_.forward(x, x, true)));
    Var<S> b = ln2_.forward(add(a, cross_attn_.forward(a, memory, false)));
    return ln3_.forward(add(b, ff_.forward(b)));
  }

  const MultiHeadAttention<S>& self_attn() const { return self_attn_; }
  const MultiHeadAttention<S>& cross_attn() const { return cross_attn_; }
  const Mlp2<S>& ff() const { return ff_; }
  const LayerNorm<S>& ln1() const { return ln1_; }
  const LayerNorm<S>& ln2() const { return ln2_; }
  const LayerNorm<S>& ln3() const { return ln3_; }

 private:
  MultiHeadAttention<S> self_attn_;
  MultiHeadAttention<S> cross_attn_;
  Mlp2<S> ff_;
  LayerNorm<S> ln1_;
  LayerNorm<S> ln2_;
  LayerNorm<S> ln3_;
};

/// Conditional autoregressive decoder: token + position embedding in, causal
/// transformer layers with cross-attention over prompt vectors, affine out to
/// vocabulary logits. Prompt rows receive learned slot embeddings so the
/// model can tell conditions apart by role, not just content.
template <typename S>
class Decoder {
 public:
  Decoder() = default;
  Decoder(ParamStore<S>& store, const std::string& prefix, Rng& rng,
          Eigen::Index dim, Eigen::Index heads, Eigen::Index ff_dim,
          Eigen::Index layers, Eigen::Index vocab, Eigen::Index max_len,
          Eigen::Index max_prompts)
      : dim_(dim), max_len_(max_len) {
    pos_ = store.add(prefix + ".pos", zeros<S>(max_len + 1, dim));
    slot_ = store.add(prefix + ".slot", zeros<S>(max_prompts, dim));
    for (Eigen::Index l = 0; l < layers; ++l) {
      layers_.emplace_back(store, prefix + ".layer" + std::to_string(l), rng,
                           dim, heads, ff_dim);
    }
    out_ = Affine<S>(store, prefix + ".out", rng, dim, vocab);
  }

  Eigen::Index max_len() const { return max_len_; }

  Var<S> with_slots(const Var<S>& prompts) const {
    if (prompts.rows() > slot_.rows()) {
      throw DimensionError("decoder: more prompts than slot embeddings");
    }
    std::vector<int> slots(static_cast<std::size_t>(prompts.rows()));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      slots[i] = static_cast<int>(i);
    }
    return add(prompts, select_rows(slot_, slots));
  }

  /// Teacher-forced logits: token_rows (L, d) are embedded input tokens
  /// (position 0 = <bos>); returns (L, vocab).
  Var<S> forward_train(const Var<S>& token_rows, const Var<S>& prompts) const {
    std::vector<int> positions(static_cast<std::size_t>(token_rows.rows()));
    const int cap = static_cast<int>(pos_.rows()) - 1;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      positions[i] = static_cast<int>(i) > cap ? cap : static_cast<int>(i);
    }
    Var<S> x = add(token_rows, select_rows(pos_, positions));
    Var<S> memory = with_slots(prompts);
    for (const auto& layer : layers_) x = layer.forward(x, memory);
    return out_.forward(x);
  }

  /// Greedy autoregressive decode with per-layer key/value caching; plain
  /// Eigen math over parameter values (no graph). Returned tokens exclude
  /// <bos>/<eos>.
  std::vector<int> greedy_decode(const Mat<S>& word_table,
                                 const Mat<S>& prompts, int bos, int eos,
                                 Eigen::Index max_len) const {
    return decode_impl(word_table, prompts, bos, eos, max_len, false, 0.0,
                       nullptr);
  }

  /// Temperature sampling variant; deterministic given the rng state.
  std::vector<int> sample_decode(const Mat<S>& word_table,
                                 const Mat<S>& prompts, int bos, int eos,
                                 Eigen::Index max_len, double temperature,
                                 Rng& rng) const {
    if (temperature <= 0.0) {
      throw ParameterError("sample decode requires temperature > 0");
    }
    return decode_impl(word_table, prompts, bos, eos, max_len, true,
                       temperature, &rng);
  }

 private:
  std::vector<int> decode_impl(const Mat<S>& word_table, const Mat<S>& prompts,
                               int bos, int eos, Eigen::Index max_len,
                               bool sample, double temperature,
                               Rng* rng) const {
    if (max_len < 1) throw ParameterError("decode: max_len must be >= 1");
    const std::size_t n_layers = layers_.size();
    // Prompt memory with slot embeddings, shared by all steps.
    Mat<S> memory = prompts;
    for (Eigen::Index i = 0; i < memory.rows(); ++i) {
      memory.row(i) += slot_.value().row(i);
    }
    std::vector<Mat<S>> self_k(n_layers), self_v(n_layers);
    std::vector<Mat<S>> cross_k(n_layers), cross_v(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
      cross_k[l] = raw::affine(memory, layers_[l].cross_attn().k_proj());
      cross_v[l] = raw::affine(memory, layers_[l].cross_attn().v_proj());
      self_k[l].resize(0, dim_);
      self_v[l].resize(0, dim_);
    }
    std::vector<int> out_tokens;
    const int pos_cap = static_cast<int>(pos_.rows()) - 1;
    while (static_cast<Eigen::Index>(out_tokens.size()) < max_len) {
      const std::size_t step = out_tokens.size();
      const int token = step == 0 ? bos : out_tokens[step - 1];
      const int position =
          static_cast<int>(step) > pos_cap ? pos_cap : static_cast<int>(step);
      Mat<S> x = word_table.row(token) + pos_.value().row(position);
      for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& layer = layers_[l];
        // Causal self-attention over the cache (which only holds the past).
        Mat<S> q = raw::affine(x, layer.self_attn().q_proj());
        Mat<S> k_new = raw::affine(x, layer.self_attn().k_proj());
        Mat<S> v_new = raw::affine(x, layer.self_attn().v_proj());
        self_k[l].conservativeResize(self_k[l].rows() + 1, dim_);
        self_v[l].conservativeResize(self_v[l].rows() + 1, dim_);
        self_k[l].row(self_k[l].rows() - 1) = k_new;
        self_v[l].row(self_v[l].rows() - 1) = v_new;
        Mat<S> attn_out = raw::attend_cached(q, self_k[l], self_v[l],
                                             layer.self_attn().heads());
        attn_out = raw::affine(attn_out, layer.self_attn().o_proj());
        x = raw::layer_norm(Mat<S>(x + attn_out), layer.ln1());
        // Cross-attention over the fixed prompt memory.
        Mat<S> q2 = raw::affine(x, layer.cross_attn().q_proj());
        Mat<S> cross_out = raw::attend_cached(q2, cross_k[l], cross_v[l],
                                              layer.cross_attn().heads());
        cross_out = raw::affine(cross_out, layer.cross_attn().o_proj());
        x = raw::layer_norm(Mat<S>(x + cross_out), layer.ln2());
        Mat<S> ff_out = raw::mlp2(x, layer.ff());
        x = raw::layer_norm(Mat<S>(x + ff_out), layer.ln3());
      }
      Mat<S> logits = raw::affine(x, out_);
      int next = 0;
      if (!sample) {
        Eigen::Index arg = 0;
        logits.row(0).maxCoeff(&arg);  // first maximum wins ties
        next = static_cast<int>(arg);
      } else {
        Mat<S> probs = raw::softmax(
            Mat<S>(logits / static_cast<S>(temperature)));
        double u = rng->uniform();
        double acc = 0.0;
        next = static_cast<int>(probs.cols()) - 1;
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
          acc += static_cast<double>(probs(0, c));
          if (u < acc) {
            next = static_cast<int>(c);
            break;
          }
        }
      }
      if (next == eos) break;
      out_tokens.push_back(next);
    }
    return out_tokens;
  }

  Eigen::Index dim_ = 0;
  Eigen::Index max_len_ = 0;
  std::vector<DecoderLayer<S>> layers_;
  Var<S> pos_;
  Var<S> slot_;
  Affine<S> out_;
};

}  // namespace msic::num
