#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msic/autodiff/ops.hpp"
#include "msic/autodiff/var.hpp"
#include "msic/core/rng.hpp"

namespace msic::num {

struct GradCheckResult {
  bool ok = true;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::string detail;  // first offending coordinate, empty when ok
};

namespace detail {

inline double fd_rel_err(double analytic, double numeric) {
  const double scale =
      std::max(1.0, std::max(std::abs(analytic), std::abs(numeric)));
  return std::abs(analytic - numeric) / scale;
}

/// Central finite difference of f against the analytic gradient at one
/// coordinate of one leaf. f() must rebuild the scalar loss from the leaves.
template <typename F>
void fd_probe_coordinate(F&& f, Var<double>& leaf, Eigen::Index r,
                         Eigen::Index c, const Mat<double>& analytic,
                         double eps, double tol, std::size_t leaf_index,
                         GradCheckResult& result) {
  const double saved = leaf.value()(r, c);
  double out_plus = 0.0;
  double out_minus = 0.0;
  {
    NoGradGuard guard;
    leaf.value()(r, c) = saved + eps;
    out_plus = f().item();
    leaf.value()(r, c) = saved - eps;
    out_minus = f().item();
    leaf.value()(r, c) = saved;
  }
  const double numeric = (out_plus - out_minus) / (2.0 * eps);
  const double a = analytic.size() != 0 ? analytic(r, c) : 0.0;
  const double abs_err = std::abs(a - numeric);
  const double rel_err = fd_rel_err(a, numeric);
  result.max_abs_err = std::max(result.max_abs_err, abs_err);
  result.max_rel_err = std::max(result.max_rel_err, rel_err);
  if (rel_err > tol && result.detail.empty()) {
    result.ok = false;
    result.detail = "leaf " + std::to_string(leaf_index) + " (" +
                    std::to_string(r) + "," + std::to_string(c) +
                    "): analytic=" + std::to_string(a) +
                    " numeric=" + std::to_string(numeric);
  }
  if (rel_err > tol) result.ok = false;
}

template <typename F>
std::vector<Mat<double>> analytic_gradients(F&& f,
                                            std::vector<Var<double>>& leaves) {
  for (auto& leaf : leaves) leaf.zero_grad();
  Var<double> loss = f();
  loss.backward();
  std::vector<Mat<double>> grads;
  grads.reserve(leaves.size());
  for (const auto& leaf : leaves) grads.push_back(leaf.grad());
  return grads;
}

}  // namespace detail

/// Exhaustive finite-difference check of every coordinate of every leaf; use
/// for small graphs. eps/tol defaults suit 64-bit scalars.
template <typename F>
GradCheckResult check_gradients(F&& f, std::vector<Var<double>>& leaves,
                                double eps = 1e-5, double tol = 1e-6) {
  GradCheckResult result;
  const auto grads = detail::analytic_gradients(f, leaves);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (Eigen::Index r = 0; r < leaves[i].rows(); ++r) {
      for (Eigen::Index c = 0; c < leaves[i].cols(); ++c) {
        detail::fd_probe_coordinate(f, leaves[i], r, c, grads[i], eps, tol, i,
                                    result);
      }
    }
  }
  return result;
}

/// Randomized spot check: `samples_per_leaf` coordinates from each leaf.
/// Suitable for composed model losses where the full sweep is too slow.
template <typename F>
GradCheckResult check_gradients_sampled(F&& f, std::vector<Var<double>>& leaves,
                                        Rng& rng,
                                        std::size_t samples_per_leaf = 4,
                                        double eps = 1e-5, double tol = 1e-5) {
  GradCheckResult result;
  const auto grads = detail::analytic_gradients(f, leaves);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const auto rows = static_cast<std::uint64_t>(leaves[i].rows());
    const auto cols = static_cast<std::uint64_t>(leaves[i].cols());
    if (rows == 0 || cols == 0) continue;
    for (std::size_t k = 0; k < samples_per_leaf; ++k) {
      const auto r = static_cast<Eigen::Index>(rng.uniform_int(rows));
      const auto c = static_cast<Eigen::Index>(rng.uniform_int(cols));
      detail::fd_probe_coordinate(f, leaves[i], r, c, grads[i], eps, tol, i,
                                  result);
    }
  }
  return result;
}

}  // namespace msic::num
