#pragma once

#include <map>
#include <string>

#include "msic/eval/metric_value.hpp"

namespace msic::eval {

/// Named metric results plus provenance metadata, serialized as one
/// JSON document: {"metadata": {...}, "metrics": {...}}. Scored
/// metrics appear as bare numbers; null results appear as
/// {"value": null, "reason": "..."}. Keys are emitted sorted, so a
/// given result set always serializes to the same bytes.
struct MetricReport {
  std::map<std::string, std::string> metadata;
  std::map<std::string, MetricValue> metrics;

  void set(const std::string& name, const MetricValue& value) {
    metrics[name] = value;
  }
  void set(const std::string& name, double value) {
    metrics[name] = MetricValue::ok(value);
  }

  std::string to_json() const;
  void save(const std::string& path) const;
};

}  // namespace msic::eval
