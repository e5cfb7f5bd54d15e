#pragma once

#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/nn/params.hpp"

namespace msic::num {

/// y = x W + b. Bias optional (attention projections go bias-free so that
/// identity-parameter unit fixtures hold exactly).
template <typename S>
class Affine {
 public:
  Affine() = default;
  Affine(ParamStore<S>& store, const std::string& prefix, Rng& rng,
         Eigen::Index in, Eigen::Index out, bool with_bias = true)
      : with_bias_(with_bias) {
    w_ = store.add(prefix + ".w", glorot<S>(rng, in, out));
    if (with_bias_) b_ = store.add(prefix + ".b", zeros<S>(1, out));
  }

  Var<S> forward(const Var<S>& x) const {
    Var<S> y = matmul(x, w_);
    if (with_bias_) y = add_bias(y, b_);
    return y;
  }

  Var<S>& weight() { return w_; }
  Var<S>& bias() { return b_; }
  const Var<S>& weight() const { return w_; }
  const Var<S>& bias() const { return b_; }
  bool has_bias() const { return with_bias_; }

 private:
  Var<S> w_;
  Var<S> b_;
  bool with_bias_ = true;
};

/// Two-layer perceptron with one tanh hidden layer.
template <typename S>
class Mlp2 {
 public:
  Mlp2() = default;
  Mlp2(ParamStore<S>& store, const std::string& prefix, Rng& rng,
       Eigen::Index in, Eigen::Index hidden, Eigen::Index out)
      : fc1_(store, prefix + ".fc1", rng, in, hidden),
        fc2_(store, prefix + ".fc2", rng, hidden, out) {}

  Var<S> forward(const Var<S>& x) const {
    return fc2_.forward(tanh_op(fc1_.forward(x)));
  }

  const Affine<S>& fc1() const { return fc1_; }
  const Affine<S>& fc2() const { return fc2_; }

 private:
  Affine<S> fc1_;
  Affine<S> fc2_;
};

/// Lookup table mapping id lists to rows of a learned matrix.
template <typename S>
class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamStore<S>& store, const std::string& prefix, Rng& rng,
            Eigen::Index vocab, Eigen::Index dim) {
    table_ = store.add(prefix + ".table", embedding_init<S>(rng, vocab, dim));
  }

  Var<S> forward(const std::vector<int>& ids) const {
    return select_rows(table_, ids);
  }

  Var<S>& table() { return table_; }
  const Var<S>& table() const { return table_; }

 private:
  Var<S> table_;
};

/// Standard layer norm: per-row standardization then learned scale/shift.
template <typename S>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore<S>& store, const std::string& prefix,
            Eigen::Index dim) {
    gamma_ = store.add(prefix + ".gamma", ones<S>(1, dim));
    beta_ = store.add(prefix + ".beta", zeros<S>(1, dim));
  }

  Var<S> forward(const Var<S>& x) const {
    return add_bias(mul_rowvec(layer_norm_rows(x), gamma_), beta_);
  }

  const Var<S>& gamma() const { return gamma_; }
  const Var<S>& beta() const { return beta_; }

 private:
  Var<S> gamma_;
  Var<S> beta_;
};

}  // namespace msic::num
