#pragma once

#include <cmath>

#include "msic/autodiff/ops.hpp"
#include "msic/autodiff/var.hpp"
#include "msic/core/errors.hpp"

namespace msic::num {

/// Diagonal Gaussian (mean, log-variance) as plain values; rows are 1 x d.
template <typename S>
struct Gaussian {
  Mat<S> mean;
  Mat<S> log_var;
};

/// Graph-tracked variant used on the training path.
template <typename S>
struct GaussianVar {
  Var<S> mean;
  Var<S> log_var;

  Gaussian<S> values() const { return Gaussian<S>{mean.value(), log_var.value()}; }
};

namespace detail {
template <typename M>
void require_gaussian_dims(const M& a, const M& b, const char* what) {
  if (a.cols() != b.cols() || a.rows() != 1 || b.rows() != 1) {
    throw DimensionError(std::string(what) + ": dimension mismatch");
  }
}
}  // namespace detail

/// z = mean + exp(log_var / 2) * noise.
template <typename S>
Mat<S> reparameterize(const Gaussian<S>& g, const Mat<S>& noise) {
  detail::require_gaussian_dims(g.mean, g.log_var, "reparameterize");
  detail::require_gaussian_dims(g.mean, noise, "reparameterize");
  return g.mean +
         ((g.log_var.array() / S(2)).exp() * noise.array()).matrix();
}

template <typename S>
Var<S> reparameterize(const GaussianVar<S>& g, const Mat<S>& noise) {
  detail::require_gaussian_dims(g.mean.value(), g.log_var.value(),
                                "reparameterize");
  detail::require_gaussian_dims(g.mean.value(), noise, "reparameterize");
  Var<S> sigma = exp_op(scale(g.log_var, S(0.5)));
  return add(g.mean, mul(sigma, Var<S>::constant(noise)));
}

/// KL(q || p) for diagonal Gaussians, closed form, summed over dimensions:
/// 0.5 * sum( exp(lq - lp) + (mq - mp)^2 exp(-lp) - 1 + lp - lq ).
template <typename S>
double kl_diagonal(const Gaussian<S>& q, const Gaussian<S>& p) {
  detail::require_gaussian_dims(q.mean, p.mean, "kl_diag_gaussian");
  detail::require_gaussian_dims(q.log_var, p.log_var, "kl_diag_gaussian");
  double total = 0.0;
  for (Eigen::Index i = 0; i < q.mean.cols(); ++i) {
    const double lq = static_cast<double>(q.log_var(0, i));
    const double lp = static_cast<double>(p.log_var(0, i));
    const double dm = static_cast<double>(q.mean(0, i) - p.mean(0, i));
    total += std::exp(lq - lp) + dm * dm * std::exp(-lp) - 1.0 + lp - lq;
  }
  return 0.5 * total;
}

template <typename S>
Var<S> kl_diagonal(const GaussianVar<S>& q, const GaussianVar<S>& p) {
  detail::require_gaussian_dims(q.mean.value(), p.mean.value(),
                                "kl_diag_gaussian");
  Var<S> dl = sub(q.log_var, p.log_var);
  Var<S> dm = sub(q.mean, p.mean);
  Var<S> term = add(exp_op(dl), mul(mul(dm, dm), exp_op(neg(p.log_var))));
  term = add(term, add_scalar(neg(dl), S(-1)));
  return scale(sum_all(term), S(0.5));
}

}  // namespace msic::num
