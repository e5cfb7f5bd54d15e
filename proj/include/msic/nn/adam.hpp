#pragma once

#include <cmath>
#include <cstdint>

#include "msic/core/errors.hpp"
#include "msic/nn/params.hpp"

namespace msic::num {

template <typename S>
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<Mat<S>> first_moment;
  std::vector<Mat<S>> second_moment;

  void init(const ParamStore<S>& params) {
    step_count = 0;
    first_moment.clear();
    second_moment.clear();
    for (const auto& e : params.entries()) {
      first_moment.push_back(
          Mat<S>::Zero(e.var.value().rows(), e.var.value().cols()));
      second_moment.push_back(
          Mat<S>::Zero(e.var.value().rows(), e.var.value().cols()));
    }
  }
};

/// Bias-corrected Adam update for one tensor; `t` is the 1-based step count.
template <typename S>
void adam_update_tensor(Mat<S>& param, const Mat<S>& grad, Mat<S>& m,
                        Mat<S>& v, std::uint64_t t, S lr, S beta1, S beta2,
                        S eps) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() ||
      param.rows() != m.rows() || param.cols() != m.cols() ||
      param.rows() != v.rows() || param.cols() != v.cols()) {
    throw DimensionError("adam: parameter/gradient/moment shape mismatch");
  }
  m = beta1 * m + (S(1) - beta1) * grad;
  v = (beta2 * v.array() + (S(1) - beta2) * grad.array().square()).matrix();
  const S bc1 = S(1) - static_cast<S>(std::pow(double(beta1), double(t)));
  const S bc2 = S(1) - static_cast<S>(std::pow(double(beta2), double(t)));
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

/// One optimizer step over a parameter store. Frozen entries are skipped
/// entirely (values and moments untouched); entries with no accumulated
/// gradient decay their moments against a zero gradient.
template <typename S>
void adam_step(ParamStore<S>& params, AdamState<S>& state, S lr,
               S beta1 = S(0.9), S beta2 = S(0.999), S eps = S(1e-8)) {
  if (state.first_moment.size() != params.tensor_count()) {
    throw DimensionError("adam: state not initialized for this store");
  }
  ++state.step_count;
  auto& entries = params.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].frozen) continue;
    Mat<S>& value = entries[i].var.value();
    const Mat<S>& g = entries[i].var.grad();
    if (g.size() == 0) {
      Mat<S> zero = Mat<S>::Zero(value.rows(), value.cols());
      adam_update_tensor(value, zero, state.first_moment[i],
                         state.second_moment[i], state.step_count, lr, beta1,
                         beta2, eps);
    } else {
      adam_update_tensor(value, g, state.first_moment[i],
                         state.second_moment[i], state.step_count, lr, beta1,
                         beta2, eps);
    }
  }
}

/// Global-norm gradient clipping over all unfrozen entries; returns the
/// pre-clip norm. Norm accumulation in double keeps the scaling decision
/// independent of the scalar type.
template <typename S>
double clip_gradients(ParamStore<S>& params, double max_norm) {
  double sum_sq = 0.0;
  for (const auto& e : params.entries()) {
    if (e.frozen || e.var.grad().size() == 0) continue;
    sum_sq += static_cast<double>(
        e.var.grad().template cast<double>().array().square().sum());
  }
  const double norm = std::sqrt(sum_sq);
  if (norm > max_norm && norm > 0.0) {
    const S scale = static_cast<S>(max_norm / norm);
    for (auto& e : params.entries()) {
      if (e.frozen || e.var.grad().size() == 0) continue;
      e.var.node()->grad *= scale;
    }
  }
  return norm;
}

}  // namespace msic::num
