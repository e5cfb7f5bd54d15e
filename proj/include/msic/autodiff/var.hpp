#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "msic/core/errors.hpp"

namespace msic::num {

/// Dense row-major matrix; rank-1 tensors are stored as 1 x n rows and
/// scalars as 1 x 1. Scalar type is templated so the production float path
/// and the double finite-difference path share one implementation.
template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {
inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}
inline std::uint64_t next_node_id() {
  thread_local std::uint64_t counter = 0;
  return ++counter;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

/// Disables graph construction in its scope (sampling / generation paths).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_enabled_flag()) {
    detail::grad_enabled_flag() = false;
  }
  ~NoGradGuard() { detail::grad_enabled_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename S>
struct Node {
  Mat<S> value;
  Mat<S> grad;  // lazily sized on first accumulation
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(Node<S>&)> backward_fn;  // scatters this->grad to parents
  std::uint64_t id = 0;
  bool requires_grad = false;

  void accumulate(const Mat<S>& g) {
    if (grad.size() == 0) {
      grad = Mat<S>::Zero(value.rows(), value.cols());
    }
    grad += g;
  }
};

/// Handle to a node in the computation graph. Copy is a cheap alias.
template <typename S>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<S>> node) : node_(std::move(node)) {}

  /// Leaf constant (no gradient tracking).
  static Var constant(Mat<S> value) {
    auto node = std::make_shared<Node<S>>();
    node->value = std::move(value);
    node->id = detail::next_node_id();
    node->requires_grad = false;
    return Var(std::move(node));
  }

  /// Leaf parameter / input that collects gradients.
  static Var leaf(Mat<S> value) {
    auto node = std::make_shared<Node<S>>();
    node->value = std::move(value);
    node->id = detail::next_node_id();
    node->requires_grad = grad_enabled();
    return Var(std::move(node));
  }

  static Var scalar(S value) {
    Mat<S> m(1, 1);
    m(0, 0) = value;
    return constant(std::move(m));
  }

  bool defined() const { return node_ != nullptr; }
  const Mat<S>& value() const { return node_->value; }
  Mat<S>& value() { return node_->value; }
  const Mat<S>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  S item() const {
    if (node_->value.size() != 1) {
      throw DimensionError("item() requires a 1x1 tensor");
    }
    return node_->value(0, 0);
  }

  std::shared_ptr<Node<S>> node() const { return node_; }

  void zero_grad() {
    if (node_) node_->grad.resize(0, 0);
  }

  /// Reverse pass from this (scalar) root. Node creation order is a valid
  /// topological order, so visiting reachable nodes by descending id walks
  /// the graph from outputs to inputs.
  void backward() const {
    if (!node_) throw ValidationError("backward() on empty Var");
    if (node_->value.size() != 1) {
      throw DimensionError("backward() requires a scalar (1x1) root");
    }
    std::vector<std::shared_ptr<Node<S>>> order;
    std::unordered_set<const Node<S>*> seen;
    std::vector<std::shared_ptr<Node<S>>> stack{node_};
    while (!stack.empty()) {
      auto current = stack.back();
      stack.pop_back();
      if (!seen.insert(current.get()).second) continue;
      order.push_back(current);
      for (const auto& parent : current->parents) stack.push_back(parent);
    }
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a->id > b->id; });
    node_->accumulate(Mat<S>::Ones(1, 1));
    for (const auto& current : order) {
      if (current->backward_fn && current->grad.size() != 0) {
        current->backward_fn(*current);
      }
    }
  }

 private:
  std::shared_ptr<Node<S>> node_;
};

/// Count of nodes reachable from `root` (introspection / leak tests).
template <typename S>
std::size_t graph_size(const Var<S>& root) {
  if (!root.defined()) return 0;
  std::unordered_set<const Node<S>*> seen;
  std::vector<std::shared_ptr<Node<S>>> stack{root.node()};
  while (!stack.empty()) {
    auto current = stack.back();
    stack.pop_back();
    if (!seen.insert(current.get()).second) continue;
    for (const auto& parent : current->parents) stack.push_back(parent);
  }
  return seen.size();
}

namespace detail {
/// Builds an op node: when gradients are globally disabled or no parent
/// tracks gradients, the result is a detached constant.
template <typename S>
Var<S> make_op(Mat<S> value, std::vector<Var<S>> parents,
               std::function<void(Node<S>&)> backward_fn) {
  bool track = grad_enabled();
  if (track) {
    track = false;
    for (const auto& p : parents) track = track || p.requires_grad();
  }
  auto node = std::make_shared<Node<S>>();
  node->value = std::move(value);
  node->id = next_node_id();
  node->requires_grad = track;
  if (track) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Var<S>(std::move(node));
}
}  // namespace detail

}  // namespace msic::num
