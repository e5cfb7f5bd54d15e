#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "msic/autodiff/var.hpp"
#include "msic/core/errors.hpp"
#include "msic/core/rng.hpp"

namespace msic::num {

template <typename S>
struct ParamEntry {
  std::string name;
  Var<S> var;
  bool frozen = false;
};

/// Named parameter registry. Registration order is the canonical iteration
/// order everywhere (optimizer, checkpoint I/O), which keeps training and
/// serialization deterministic.
template <typename S>
class ParamStore {
 public:
  Var<S> add(const std::string& name, Mat<S> init) {
    if (index_.count(name) != 0) {
      throw ValidationError("duplicate parameter name: " + name);
    }
    Var<S> var = Var<S>::leaf(std::move(init));
    index_.emplace(name, entries_.size());
    entries_.push_back(ParamEntry<S>{name, var, false});
    return var;
  }

  bool contains(const std::string& name) const {
    return index_.count(name) != 0;
  }

  Var<S> get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw ValidationError("unknown parameter: " + name);
    }
    return entries_[it->second].var;
  }

  std::vector<ParamEntry<S>>& entries() { return entries_; }
  const std::vector<ParamEntry<S>>& entries() const { return entries_; }

  void zero_grad() {
    for (auto& e : entries_) e.var.zero_grad();
  }

  /// Freeze/unfreeze every parameter whose name starts with `prefix`.
  void set_frozen(const std::string& prefix, bool frozen) {
    for (auto& e : entries_) {
      if (e.name.rfind(prefix, 0) == 0) e.frozen = frozen;
    }
  }

  std::size_t tensor_count() const { return entries_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
      n += static_cast<std::size_t>(e.var.value().size());
    }
    return n;
  }

 private:
  std::vector<ParamEntry<S>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Initialization helpers (all drawn from a caller-owned Rng so that the
// construction order fully determines the initial parameter values.)
// ---------------------------------------------------------------------------

template <typename S>
Mat<S> zeros(Eigen::Index rows, Eigen::Index cols) {
  return Mat<S>::Zero(rows, cols);
}

template <typename S>
Mat<S> ones(Eigen::Index rows, Eigen::Index cols) {
  return Mat<S>::Ones(rows, cols);
}

/// Glorot-uniform weight init: U(-l, l), l = sqrt(6 / (fan_in + fan_out)).
template <typename S>
Mat<S> glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat<S> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<S>(rng.uniform(-limit, limit));
    }
  }
  return m;
}

/// Small-uniform init for embedding tables: U(-0.05, 0.05).
template <typename S>
Mat<S> embedding_init(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat<S> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<S>(rng.uniform(-0.05, 0.05));
    }
  }
  return m;
}

}  // namespace msic::num
