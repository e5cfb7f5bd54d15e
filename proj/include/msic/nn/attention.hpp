#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/nn/layers.hpp"
#include "msic/nn/params.hpp"

namespace msic::num {

/// Single-head scaled dot-product pooling over an ordered history of row
/// vectors, with the last row as query. Learned position embeddings (indexed
/// by row order, zero-initialized) are added to the query/key inputs only;
/// values project the raw history, so a history of all-equal vectors pools to
/// the value projection of that vector for any parameter setting.
template <typename S>
class AttentionPool {
 public:
  AttentionPool() = default;
  AttentionPool(ParamStore<S>& store, const std::string& prefix, Rng& rng,
                Eigen::Index dim, Eigen::Index max_len)
      : dim_(dim) {
    wq_ = store.add(prefix + ".wq", glorot<S>(rng, dim, dim));
    wk_ = store.add(prefix + ".wk", glorot<S>(rng, dim, dim));
    wv_ = store.add(prefix + ".wv", glorot<S>(rng, dim, dim));
    pos_ = store.add(prefix + ".pos", zeros<S>(max_len, dim));
  }

  /// history: (n, d) with rows in temporal order, n >= 1.
  Var<S> forward(const Var<S>& history) const {
    const Eigen::Index n = history.rows();
    if (n < 1) throw ValidationError("attention_pool: empty history");
    if (history.cols() != dim_) {
      throw DimensionError("attention_pool: vector length mismatch");
    }
    std::vector<int> positions(static_cast<std::size_t>(n));
    const int cap = static_cast<int>(pos_.rows()) - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      positions[static_cast<std::size_t>(i)] =
          static_cast<int>(i) > cap ? cap : static_cast<int>(i);
    }
    Var<S> pos_rows = select_rows(pos_, positions);
    Var<S> keyed = add(history, pos_rows);
    Var<S> q = matmul(slice_rows(keyed, n - 1, 1), wq_);
    Var<S> k = matmul(keyed, wk_);
    Var<S> v = matmul(history, wv_);
    const S inv_sqrt_d = S(1) / static_cast<S>(std::sqrt(double(dim_)));
    Var<S> weights = softmax_rows(scale(matmul_nt(q, k), inv_sqrt_d));
    return matmul(weights, v);
  }

  Var<S>& wq() { return wq_; }
  Var<S>& wk() { return wk_; }
  Var<S>& wv() { return wv_; }
  Var<S>& pos() { return pos_; }

 private:
  Eigen::Index dim_ = 0;
  Var<S> wq_;
  Var<S> wk_;
  Var<S> wv_;
  Var<S> pos_;
};

/// Multi-head scaled dot-product attention over (queries x, memory m).
/// Self-attention passes m == x; causal masking requires square scores.
template <typename S>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore<S>& store, const std::string& prefix, Rng& rng,
                     Eigen::Index dim, Eigen::Index heads)
      : dim_(dim), heads_(heads) {
    if (heads < 1 || dim % heads != 0) {
      throw DimensionError("attention: head count must divide model dim");
    }
    q_proj_ = Affine<S>(store, prefix + ".q", rng, dim, dim);
    k_proj_ = Affine<S>(store, prefix + ".k", rng, dim, dim);
    v_proj_ = Affine<S>(store, prefix + ".v", rng, dim, dim);
    o_proj_ = Affine<S>(store, prefix + ".o", rng, dim, dim);
  }

  Var<S> forward(const Var<S>& x, const Var<S>& memory, bool causal) const {
    if (x.cols() != dim_ || memory.cols() != dim_) {
      throw DimensionError("attention: input width mismatch");
    }
    if (causal && x.rows() != memory.rows()) {
      throw DimensionError("attention: causal mask requires self-attention");
    }
    Var<S> q = q_proj_.forward(x);
    Var<S> k = k_proj_.forward(memory);
    Var<S> v = v_proj_.forward(memory);
    const Eigen::Index dh = dim_ / heads_;
    const S inv_sqrt = S(1) / static_cast<S>(std::sqrt(double(dh)));
    std::vector<Var<S>> heads;
    heads.reserve(static_cast<std::size_t>(heads_));
    for (Eigen::Index h = 0; h < heads_; ++h) {
      Var<S> qh = slice_cols(q, h * dh, dh);
      Var<S> kh = slice_cols(k, h * dh, dh);
      Var<S> vh = slice_cols(v, h * dh, dh);
      Var<S> scores = scale(matmul_nt(qh, kh), inv_sqrt);
      Var<S> attn =
          causal ? causal_softmax_rows(scores) : softmax_rows(scores);
      heads.push_back(matmul(attn, vh));
    }
    return o_proj_.forward(concat_cols(heads));
  }

  const Affine<S>& q_proj() const { return q_proj_; }
  const Affine<S>& k_proj() const { return k_proj_; }
  const Affine<S>& v_proj() const { return v_proj_; }
  const Affine<S>& o_proj() const { return o_proj_; }
  Eigen::Index heads() const { return heads_; }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_ = 0;
  Eigen::Index heads_ = 0;
  Affine<S> q_proj_;
  Affine<S> k_proj_;
  Affine<S> v_proj_;
  Affine<S> o_proj_;
};

}  // namespace msic::num
