#pragma once

#include <optional>
#include <string>
#include <utility>

namespace msic::eval {

/// A metric score, or a null result carrying the reason it could not
/// be computed (degenerate input, zero variance, missing references).
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  static MetricValue ok(double v) { return {v, {}}; }
  static MetricValue null(std::string why) {
    return {std::nullopt, std::move(why)};
  }
  bool has_value() const { return value.has_value(); }
};

}  // namespace msic::eval
