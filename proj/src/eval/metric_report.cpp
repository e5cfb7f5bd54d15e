#include "msic/eval/metric_report.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "msic/core/errors.hpp"

namespace msic::eval {

std::string MetricReport::to_json() const {
  nlohmann::json doc;  // plain json keeps object keys sorted
  doc["metadata"] = nlohmann::json::object();
  for (const auto& [key, value] : metadata) doc["metadata"][key] = value;
  doc["metrics"] = nlohmann::json::object();
  for (const auto& [name, metric] : metrics) {
    if (metric.has_value()) {
      doc["metrics"][name] = *metric.value;
    } else {
      doc["metrics"][name] = {{"value", nullptr}, {"reason", metric.reason}};
    }
  }
  return doc.dump(2) + "\n";
}

void MetricReport::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot open metric report for writing: " + path);
  }
  out << to_json();
  if (!out) throw ValidationError("failed writing metric report: " + path);
}

}  // namespace msic::eval
