#include "msic/eval/frequency.hpp"

#include <cmath>

#include "msic/core/errors.hpp"

namespace msic::eval {
namespace {

std::string item_key(const data::Corpus& corpus, data::Kind kind, int code) {
  return std::string(data::kind_name(kind)) + ":" +
         corpus.vocabs.of(kind).code(code);
}

/// All (kind, code) items of one visit for the included kinds, in
/// canonical order (kind index, then code index).
std::vector<std::string> visit_items(const data::Corpus& corpus,
                                     const data::Visit& visit,
                                     const std::vector<data::Kind>& kinds) {
  std::vector<std::string> items;
  for (data::Kind k : FrequencyProfile::all_kinds()) {
    bool included = false;
    for (data::Kind want : kinds) included = included || want == k;
    if (!included) continue;
    for (int code : visit.events(k).indices) {
      items.push_back(item_key(corpus, k, code));
    }
  }
  return items;
}

void normalize(std::map<std::string, double>& freq) {
  double total = 0.0;
  for (const auto& [key, count] : freq) total += count;
  if (total <= 0.0) return;
  for (auto& [key, count] : freq) count /= total;
}

void check_kinds(const std::vector<data::Kind>& kinds) {
  if (kinds.empty()) {
    throw ParameterError("frequency profile requires at least one event kind");
  }
  for (data::Kind k : kinds) {
    if (k == data::Kind::kWord) {
      throw ParameterError("frequency profiles cover event kinds only");
    }
  }
}

}  // namespace

FrequencyProfile FrequencyProfile::unigram(
    const data::Corpus& corpus, const std::vector<data::Kind>& kinds) {
  check_kinds(kinds);
  FrequencyProfile out;
  out.kind = ProfileKind::kUnigram;
  for (const auto& rec : corpus.records) {
    for (const auto& visit : rec.visits) {
      for (const auto& item : visit_items(corpus, visit, kinds)) {
        out.freq[item] += 1.0;
      }
    }
  }
  normalize(out.freq);
  return out;
}

FrequencyProfile FrequencyProfile::bigram(const data::Corpus& corpus,
                                          const std::vector<data::Kind>& kinds) {
  check_kinds(kinds);
  FrequencyProfile out;
  out.kind = ProfileKind::kBigram;
  for (const auto& rec : corpus.records) {
    for (const auto& visit : rec.visits) {
      std::vector<std::string> items = visit_items(corpus, visit, kinds);
      for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
          out.freq[items[i] + "&" + items[j]] += 1.0;
        }
      }
    }
  }
  normalize(out.freq);
  return out;
}

FrequencyProfile FrequencyProfile::sequential_bigram(
    const data::Corpus& corpus, const std::vector<data::Kind>& kinds) {
  check_kinds(kinds);
  FrequencyProfile out;
  out.kind = ProfileKind::kSequentialBigram;
  for (const auto& rec : corpus.records) {
    for (std::size_t t = 0; t + 1 < rec.visits.size(); ++t) {
      std::vector<std::string> from =
          visit_items(corpus, rec.visits[t], kinds);
      std::vector<std::string> to =
          visit_items(corpus, rec.visits[t + 1], kinds);
      for (const auto& a : from) {
        for (const auto& b : to) out.freq[a + ">" + b] += 1.0;
      }
    }
  }
  normalize(out.freq);
  return out;
}

MetricValue similarity_score(const FrequencyProfile& real,
                             const FrequencyProfile& synthetic) {
  if (real.kind != synthetic.kind) {
    throw ParameterError("similarity_score: profiles of different kinds");
  }
  if (real.freq.empty() && synthetic.freq.empty()) {
    return MetricValue::null("both frequency profiles are empty");
  }
  // Union of keys; the real profile is the reference.
  std::map<std::string, std::pair<double, double>> joined;
  for (const auto& [key, f] : real.freq) joined[key].first = f;
  for (const auto& [key, f] : synthetic.freq) joined[key].second = f;
  double mean_ref = 0.0;
  for (const auto& [key, fs] : joined) mean_ref += fs.first;
  mean_ref /= static_cast<double>(joined.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [key, fs] : joined) {
    ss_res += (fs.second - fs.first) * (fs.second - fs.first);
    ss_tot += (fs.first - mean_ref) * (fs.first - mean_ref);
  }
  if (ss_tot <= 0.0) {
    return MetricValue::null("reference profile has zero variance");
  }
  return MetricValue::ok(1.0 - ss_res / ss_tot);
}

MetricValue dimwise_fidelity(const data::Corpus& real,
                             const data::Corpus& synthetic) {
  auto rates = [](const data::Corpus& corpus) {
    std::vector<double> out;
    const std::size_t visits = corpus.visit_count();
    for (data::Kind k : FrequencyProfile::all_kinds()) {
      std::vector<double> counts(
          static_cast<std::size_t>(corpus.vocabs.of(k).size()), 0.0);
      for (const auto& rec : corpus.records) {
        for (const auto& visit : rec.visits) {
          for (int code : visit.events(k).indices) counts[code] += 1.0;
        }
      }
      for (double c : counts) {
        out.push_back(visits == 0 ? 0.0 : c / static_cast<double>(visits));
      }
    }
    return out;
  };
  std::vector<double> x = rates(real), y = rates(synthetic);
  if (x.size() != y.size()) {
    throw ParameterError("dimwise_fidelity: vocabulary size mismatch");
  }
  if (x.empty()) return MetricValue::null("empty vocabularies");
  if (x == y) return MetricValue::ok(1.0);  // exact by definition
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    return MetricValue::null("occurrence rates have zero variance");
  }
  return MetricValue::ok(sxy / std::sqrt(sxx * syy));
}

}  // namespace msic::eval
