#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "msic/autodiff/var.hpp"
#include "msic/core/errors.hpp"

namespace msic::num {

namespace detail {
template <typename S>
void require_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch (" +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}
template <typename S>
void to_parent(const std::shared_ptr<Node<S>>& p, const Mat<S>& g) {
  if (p->requires_grad) p->accumulate(g);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic
// ---------------------------------------------------------------------------

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "add");
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(a.value() + b.value(), {a, b},
                            [pa, pb](Node<S>& self) {
                              detail::to_parent(pa, self.grad);
                              detail::to_parent(pb, self.grad);
                            });
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "sub");
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(a.value() - b.value(), {a, b},
                            [pa, pb](Node<S>& self) {
                              detail::to_parent(pa, self.grad);
                              detail::to_parent(pb, Mat<S>(-self.grad));
                            });
}

template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "mul");
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(
      a.value().cwiseProduct(b.value()), {a, b}, [pa, pb](Node<S>& self) {
        detail::to_parent(pa, Mat<S>(self.grad.cwiseProduct(pb->value)));
        detail::to_parent(pb, Mat<S>(self.grad.cwiseProduct(pa->value)));
      });
}

template <typename S>
Var<S> scale(const Var<S>& a, S c) {
  auto pa = a.node();
  return detail::make_op<S>(Mat<S>(a.value() * c), {a},
                            [pa, c](Node<S>& self) {
                              detail::to_parent(pa, Mat<S>(self.grad * c));
                            });
}

template <typename S>
Var<S> neg(const Var<S>& a) {
  return scale(a, S(-1));
}

template <typename S>
Var<S> add_scalar(const Var<S>& a, S c) {
  auto pa = a.node();
  return detail::make_op<S>(Mat<S>(a.value().array() + c), {a},
                            [pa](Node<S>& self) {
                              detail::to_parent(pa, self.grad);
                            });
}

/// Broadcast-add a (1, d) bias row onto every row of a (n, d) matrix.
template <typename S>
Var<S> add_bias(const Var<S>& a, const Var<S>& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw DimensionError("add_bias: bias must be 1 x cols(a)");
  }
  auto pa = a.node();
  auto pb = bias.node();
  Mat<S> out = a.value();
  out.rowwise() += Eigen::RowVector<S, Eigen::Dynamic>(bias.value().row(0));
  return detail::make_op<S>(
      std::move(out), {a, bias}, [pa, pb](Node<S>& self) {
        detail::to_parent(pa, self.grad);
        detail::to_parent(pb, Mat<S>(self.grad.colwise().sum()));
      });
}

/// Broadcast-multiply every row of a (n, d) matrix by a (1, d) row vector.
template <typename S>
Var<S> mul_rowvec(const Var<S>& a, const Var<S>& v) {
  if (v.rows() != 1 || v.cols() != a.cols()) {
    throw DimensionError("mul_rowvec: v must be 1 x cols(a)");
  }
  auto pa = a.node();
  auto pv = v.node();
  Mat<S> out = a.value().array().rowwise() * v.value().row(0).array();
  return detail::make_op<S>(
      std::move(out), {a, v}, [pa, pv](Node<S>& self) {
        detail::to_parent(
            pa, Mat<S>(self.grad.array().rowwise() * pv->value.row(0).array()));
        detail::to_parent(
            pv, Mat<S>(self.grad.cwiseProduct(pa->value).colwise().sum()));
      });
}

// ---------------------------------------------------------------------------
// Matrix products
// ---------------------------------------------------------------------------

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
  }
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(
      Mat<S>(a.value() * b.value()), {a, b}, [pa, pb](Node<S>& self) {
        detail::to_parent(pa, Mat<S>(self.grad * pb->value.transpose()));
        detail::to_parent(pb, Mat<S>(pa->value.transpose() * self.grad));
      });
}

/// a * b^T without materializing the transpose in the graph.
template <typename S>
Var<S> matmul_nt(const Var<S>& a, const Var<S>& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: column counts differ");
  }
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(
      Mat<S>(a.value() * b.value().transpose()), {a, b},
      [pa, pb](Node<S>& self) {
        detail::to_parent(pa, Mat<S>(self.grad * pb->value));
        detail::to_parent(pb, Mat<S>(self.grad.transpose() * pa->value));
      });
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

template <typename S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Mat<S> out(rows, cols);
  Eigen::Index at = 0;
  std::vector<std::shared_ptr<Node<S>>> nodes;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    nodes.push_back(p.node());
    widths.push_back(p.cols());
  }
  return detail::make_op<S>(
      std::move(out), parts, [nodes, widths](Node<S>& self) {
        Eigen::Index start = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          detail::to_parent(nodes[i],
                            Mat<S>(self.grad.middleCols(start, widths[i])));
          start += widths[i];
        }
      });
}

template <typename S>
Var<S> concat_cols(const Var<S>& a, const Var<S>& b) {
  return concat_cols(std::vector<Var<S>>{a, b});
}

template <typename S>
Var<S> concat_rows(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Mat<S> out(rows, cols);
  Eigen::Index at = 0;
  std::vector<std::shared_ptr<Node<S>>> nodes;
  std::vector<Eigen::Index> heights;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
    nodes.push_back(p.node());
    heights.push_back(p.rows());
  }
  return detail::make_op<S>(
      std::move(out), parts, [nodes, heights](Node<S>& self) {
        Eigen::Index start = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          detail::to_parent(nodes[i],
                            Mat<S>(self.grad.middleRows(start, heights[i])));
          start += heights[i];
        }
      });
}

template <typename S>
Var<S> concat_rows(const Var<S>& a, const Var<S>& b) {
  return concat_rows(std::vector<Var<S>>{a, b});
}

template <typename S>
Var<S> slice_cols(const Var<S>& a, Eigen::Index start, Eigen::Index len) {
  if (start < 0 || len < 0 || start + len > a.cols()) {
    throw DimensionError("slice_cols: range out of bounds");
  }
  auto pa = a.node();
  return detail::make_op<S>(
      Mat<S>(a.value().middleCols(start, len)), {a},
      [pa, start, len](Node<S>& self) {
        if (!pa->requires_grad) return;
        Mat<S> g = Mat<S>::Zero(pa->value.rows(), pa->value.cols());
        g.middleCols(start, len) = self.grad;
        pa->accumulate(g);
      });
}

template <typename S>
Var<S> slice_rows(const Var<S>& a, Eigen::Index start, Eigen::Index len) {
  if (start < 0 || len < 0 || start + len > a.rows()) {
    throw DimensionError("slice_rows: range out of bounds");
  }
  auto pa = a.node();
  return detail::make_op<S>(
      Mat<S>(a.value().middleRows(start, len)), {a},
      [pa, start, len](Node<S>& self) {
        if (!pa->requires_grad) return;
        Mat<S> g = Mat<S>::Zero(pa->value.rows(), pa->value.cols());
        g.middleRows(start, len) = self.grad;
        pa->accumulate(g);
      });
}

/// Row gather (embedding lookup); backward scatter-adds, so repeated indices
/// sum their contributions.
template <typename S>
Var<S> select_rows(const Var<S>& table, const std::vector<int>& indices) {
  for (int idx : indices) {
    if (idx < 0 || idx >= table.rows()) {
      throw DimensionError("select_rows: index " + std::to_string(idx) +
                           " out of range for " + std::to_string(table.rows()) +
                           " rows");
    }
  }
  Mat<S> out(static_cast<Eigen::Index>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(indices[i]);
  }
  auto pt = table.node();
  return detail::make_op<S>(
      std::move(out), {table}, [pt, indices](Node<S>& self) {
        if (!pt->requires_grad) return;
        Mat<S> g = Mat<S>::Zero(pt->value.rows(), pt->value.cols());
        for (std::size_t i = 0; i < indices.size(); ++i) {
          g.row(indices[i]) += self.grad.row(static_cast<Eigen::Index>(i));
        }
        pt->accumulate(g);
      });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename S>
Var<S> sum_all(const Var<S>& a) {
  auto pa = a.node();
  Mat<S> out(1, 1);
  out(0, 0) = a.value().sum();
  return detail::make_op<S>(
      std::move(out), {a}, [pa](Node<S>& self) {
        detail::to_parent(
            pa, Mat<S>(Mat<S>::Constant(pa->value.rows(), pa->value.cols(),
                                        self.grad(0, 0))));
      });
}

template <typename S>
Var<S> mean_all(const Var<S>& a) {
  const S inv = S(1) / static_cast<S>(a.value().size());
  return scale(sum_all(a), inv);
}

/// Column-wise mean: (n, d) -> (1, d). Used for mean pooling over rows.
template <typename S>
Var<S> mean_rows(const Var<S>& a) {
  if (a.rows() == 0) throw DimensionError("mean_rows: empty input");
  auto pa = a.node();
  const S inv = S(1) / static_cast<S>(a.rows());
  return detail::make_op<S>(
      Mat<S>(a.value().colwise().mean()), {a}, [pa, inv](Node<S>& self) {
        if (!pa->requires_grad) return;
        Mat<S> g(pa->value.rows(), pa->value.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          g.row(r) = self.grad.row(0) * inv;
        }
        pa->accumulate(g);
      });
}

// ---------------------------------------------------------------------------
// Nonlinearities
// ---------------------------------------------------------------------------

template <typename S>
Var<S> sigmoid(const Var<S>& a) {
  auto pa = a.node();
  Mat<S> out = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  return detail::make_op<S>(
      std::move(out), {a}, [pa](Node<S>& self) {
        const auto& y = self.value.array();
        detail::to_parent(pa,
                          Mat<S>((self.grad.array() * y * (S(1) - y)).matrix()));
      });
}

template <typename S>
Var<S> tanh_op(const Var<S>& a) {
  auto pa = a.node();
  Mat<S> out = a.value().array().tanh().matrix();
  return detail::make_op<S>(
      std::move(out), {a}, [pa](Node<S>& self) {
        const auto& y = self.value.array();
        detail::to_parent(pa,
                          Mat<S>((self.grad.array() * (S(1) - y * y)).matrix()));
      });
}

template <typename S>
Var<S> exp_op(const Var<S>& a) {
  auto pa = a.node();
  Mat<S> out = a.value().array().exp().matrix();
  return detail::make_op<S>(
      std::move(out), {a}, [pa](Node<S>& self) {
        detail::to_parent(pa,
                          Mat<S>(self.grad.cwiseProduct(self.value)));
      });
}

/// Clamp with straight-through gradient inside [lo, hi] (inclusive) and zero
/// gradient where the input was clipped.
template <typename S>
Var<S> clamp(const Var<S>& a, S lo, S hi) {
  auto pa = a.node();
  Mat<S> out = a.value().array().max(lo).min(hi).matrix();
  return detail::make_op<S>(
      std::move(out), {a}, [pa, lo, hi](Node<S>& self) {
        if (!pa->requires_grad) return;
        const auto& x = pa->value.array();
        Mat<S> mask =
            ((x >= lo) && (x <= hi)).template cast<S>().matrix();
        pa->accumulate(self.grad.cwiseProduct(mask));
      });
}

// ---------------------------------------------------------------------------
// Softmax / normalization
// ---------------------------------------------------------------------------

namespace detail {
template <typename S>
Mat<S> softmax_forward(const Mat<S>& x) {
  Mat<S> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mx = x.row(r).maxCoeff();
    Eigen::Array<S, 1, Eigen::Dynamic> e = (x.row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return out;
}
template <typename S>
Mat<S> softmax_backward(const Mat<S>& y, const Mat<S>& g) {
  Mat<S> dx(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const S dot = y.row(r).cwiseProduct(g.row(r)).sum();
    dx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
  }
  return dx;
}
}  // namespace detail

template <typename S>
Var<S> softmax_rows(const Var<S>& a) {
  auto pa = a.node();
  return detail::make_op<S>(
      detail::softmax_forward(a.value()), {a}, [pa](Node<S>& self) {
        detail::to_parent(pa, detail::softmax_backward(self.value, self.grad));
      });
}

/// Row-wise softmax over a square score matrix with entries j > i masked out
/// (additive -1e9 before normalization): row i attends to positions 0..i.
template <typename S>
Var<S> causal_softmax_rows(const Var<S>& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("causal_softmax_rows: square matrix required");
  }
  Mat<S> masked = a.value();
  for (Eigen::Index r = 0; r < masked.rows(); ++r) {
    for (Eigen::Index c = r + 1; c < masked.cols(); ++c) {
      masked(r, c) -= S(1e9);
    }
  }
  auto pa = a.node();
  return detail::make_op<S>(
      detail::softmax_forward(masked), {a}, [pa](Node<S>& self) {
        detail::to_parent(pa, detail::softmax_backward(self.value, self.grad));
      });
}

/// Per-row standardization (x - mean) / sqrt(var + eps); variance uses the
/// population convention (divide by d). Affine scale/shift live in the layer.
template <typename S>
Var<S> layer_norm_rows(const Var<S>& a, S eps = S(1e-5)) {
  const Eigen::Index d = a.cols();
  if (d == 0) throw DimensionError("layer_norm_rows: empty rows");
  Mat<S> xhat(a.rows(), d);
  Mat<S> inv_sigma(a.rows(), 1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const S mu = a.value().row(r).mean();
    Eigen::Array<S, 1, Eigen::Dynamic> centered =
        a.value().row(r).array() - mu;
    const S var = centered.square().mean();
    const S inv = S(1) / std::sqrt(var + eps);
    inv_sigma(r, 0) = inv;
    xhat.row(r) = (centered * inv).matrix();
  }
  auto pa = a.node();
  return detail::make_op<S>(
      std::move(xhat), {a}, [pa, inv_sigma, d](Node<S>& self) {
        if (!pa->requires_grad) return;
        Mat<S> dx(self.value.rows(), d);
        for (Eigen::Index r = 0; r < self.value.rows(); ++r) {
          const auto g = self.grad.row(r).array();
          const auto y = self.value.row(r).array();
          const S g_mean = g.mean();
          const S gy_mean = (g * y).mean();
          dx.row(r) = ((g - g_mean - y * gy_mean) * inv_sigma(r, 0)).matrix();
        }
        pa->accumulate(dx);
      });
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean binary cross-entropy between probabilities `p` and 0/1 targets `y`
/// (same shape). Probabilities are clipped to [1e-7, 1 - 1e-7] before the
/// logs; gradients vanish on clipped entries.
template <typename S>
Var<S> bce_mean(const Var<S>& p, const Mat<S>& y) {
  if (p.rows() != y.rows() || p.cols() != y.cols()) {
    throw DimensionError("bce_mean: target shape mismatch");
  }
  const S lo = S(1e-7);
  const S hi = S(1) - S(1e-7);
  Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> pc =
      p.value().array().max(lo).min(hi);
  const S n = static_cast<S>(p.value().size());
  Mat<S> out(1, 1);
  out(0, 0) =
      -((y.array() * pc.log()) + ((S(1) - y.array()) * (S(1) - pc).log()))
           .sum() /
      n;
  auto pp = p.node();
  return detail::make_op<S>(
      std::move(out), {p}, [pp, y, lo, hi, n](Node<S>& self) {
        if (!pp->requires_grad) return;
        const auto& x = pp->value.array();
        Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> pc =
            x.max(lo).min(hi);
        Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> gate =
            ((x >= lo) && (x <= hi)).template cast<S>();
        Mat<S> g =
            (self.grad(0, 0) / n *
             gate * (pc - y.array()) / (pc * (S(1) - pc)))
                .matrix();
        pp->accumulate(g);
      });
}

/// Sum over positions of -log softmax(logits_t)[target_t]; logits is (T, V).
template <typename S>
Var<S> lm_nll_sum(const Var<S>& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) {
    throw DimensionError("lm_nll_sum: one target per logit row required");
  }
  for (int t : targets) {
    if (t < 0 || t >= logits.cols()) {
      throw DimensionError("lm_nll_sum: target id out of vocabulary range");
    }
  }
  S total = S(0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const S mx = logits.value().row(r).maxCoeff();
    const S lse =
        mx + std::log((logits.value().row(r).array() - mx).exp().sum());
    total += lse - logits.value()(r, targets[static_cast<std::size_t>(r)]);
  }
  Mat<S> out(1, 1);
  out(0, 0) = total;
  auto pl = logits.node();
  return detail::make_op<S>(
      std::move(out), {logits}, [pl, targets](Node<S>& self) {
        if (!pl->requires_grad) return;
        Mat<S> g = detail::softmax_forward(pl->value);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          g(r, targets[static_cast<std::size_t>(r)]) -= S(1);
        }
        pl->accumulate(Mat<S>(g * self.grad(0, 0)));
      });
}

}  // namespace msic::num
