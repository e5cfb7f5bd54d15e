#include "msic/privacy/attacks.hpp"

#include <algorithm>

#include "msic/core/rng.hpp"

namespace msic::privacy {
namespace {

std::vector<FlatRecord> flatten_all(const data::Corpus& corpus) {
  std::vector<FlatRecord> out;
  out.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) out.push_back(flatten(rec));
  return out;
}

/// Nearest-synthetic distance; ties resolved to the lowest index.
double nearest_distance(const FlatRecord& probe,
                        const std::vector<FlatRecord>& synthetic) {
  double best = 2.0;
  for (const auto& s : synthetic) {
    double d = jaccard_distance(probe, s);
    if (d < best) best = d;
  }
  return best;
}

/// First `take` elements of a seeded shuffle of [0, n).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t take,
                                        Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(idx[i - 1], idx[j]);
  }
  if (take < n) idx.resize(take);
  return idx;
}

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

FlatRecord flatten(const data::PatientRecord& record) {
  FlatRecord out;
  out.patient_id = record.patient_id;
  for (const auto& visit : record.visits) {
    for (int k = 0; k < 3; ++k) {
      for (int code : visit.events(static_cast<data::Kind>(k)).indices) {
        out.items.emplace(k, code);
      }
    }
  }
  return out;
}

double jaccard_distance(const FlatRecord& a, const FlatRecord& b) {
  if (a.items.empty() && b.items.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& item : a.items) inter += b.items.count(item);
  const std::size_t uni = a.items.size() + b.items.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

MembershipResult membership_attack(const data::Corpus& train,
                                   const data::Corpus& test,
                                   const data::Corpus& synthetic,
                                   const MembershipConfig& config,
                                   std::uint64_t seed) {
  config.validate();
  if (train.records.empty() || test.records.empty() ||
      synthetic.records.empty()) {
    throw ValidationError("membership attack needs non-empty corpora");
  }
  std::vector<FlatRecord> train_flat = flatten_all(train);
  std::vector<FlatRecord> test_flat = flatten_all(test);
  std::vector<FlatRecord> synth_flat = flatten_all(synthetic);

  Rng rng(seed);
  const std::size_t take =
      static_cast<std::size_t>(config.sample_per_side);
  std::vector<std::size_t> member_idx =
      sample_indices(train_flat.size(), take, rng);
  std::vector<std::size_t> nonmember_idx =
      sample_indices(test_flat.size(), take, rng);

  // (nearest distance, is member) for every sampled record, members first.
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t i : member_idx) {
    scored.emplace_back(nearest_distance(train_flat[i], synth_flat), true);
  }
  for (std::size_t i : nonmember_idx) {
    scored.emplace_back(nearest_distance(test_flat[i], synth_flat), false);
  }

  MembershipResult result;
  std::size_t eval_begin = 0;
  if (config.fixed_tau >= 0.0) {
    result.tau = config.fixed_tau;
  } else {
    // Shuffle so the calibration share mixes members and non-members,
    // then take the median nearest distance as the threshold.
    for (std::size_t i = scored.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
      std::swap(scored[i - 1], scored[j]);
    }
    std::size_t n_cal = static_cast<std::size_t>(
        config.calibration_fraction * static_cast<double>(scored.size()));
    if (n_cal < 1) n_cal = 1;
    if (n_cal >= scored.size()) {
      throw ValidationError(
          "membership attack: calibration share leaves no evaluation records");
    }
    std::vector<double> cal;
    for (std::size_t i = 0; i < n_cal; ++i) cal.push_back(scored[i].first);
    std::sort(cal.begin(), cal.end());
    result.tau = cal.size() % 2 == 1
                     ? cal[cal.size() / 2]
                     : 0.5 * (cal[cal.size() / 2 - 1] + cal[cal.size() / 2]);
    eval_begin = n_cal;
  }

  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = eval_begin; i < scored.size(); ++i) {
    const bool member = scored[i].second;
    const bool predicted = scored[i].first <= result.tau;
    if (member) {
      result.eval_members += 1;
      (predicted ? tp : fn) += 1;
    } else {
      result.eval_nonmembers += 1;
      (predicted ? fp : tn) += 1;
    }
  }
  result.accuracy = safe_div(tp + tn, tp + tn + fp + fn);
  result.precision = safe_div(tp, tp + fp);
  result.recall = safe_div(tp, tp + fn);
  result.f1 = safe_div(2 * tp, 2 * tp + fp + fn);
  return result;
}

namespace {

/// Micro-F1 of nearest-neighbor sensitive-code prediction against the
/// given candidate pool.
double attribute_f1(const std::vector<FlatRecord>& probes,
                    const std::vector<FlatRecord>& pool,
                    const std::set<std::pair<int, int>>& common) {
  double tp = 0, fp = 0, fn = 0;
  for (const auto& probe : probes) {
    std::set<std::pair<int, int>> probe_common, probe_sensitive;
    for (const auto& item : probe.items) {
      (common.count(item) ? probe_common : probe_sensitive).insert(item);
    }
    // Neighbor sharing the most common codes; ties to the lowest index.
    std::size_t best_overlap = 0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::size_t overlap = 0;
      for (const auto& item : pool[i].items) {
        if (common.count(item) && probe_common.count(item)) ++overlap;
      }
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_idx = i;
      }
    }
    for (const auto& item : pool[best_idx].items) {
      if (common.count(item)) continue;
      if (probe_sensitive.count(item)) {
        tp += 1;
      } else {
        fp += 1;
      }
    }
    for (const auto& item : probe_sensitive) {
      if (!pool[best_idx].items.count(item)) fn += 1;
    }
  }
  return safe_div(2 * tp, 2 * tp + fp + fn);
}

}  // namespace

AttributeResult attribute_attack(const data::Corpus& train,
                                 const data::Corpus& test,
                                 const data::Corpus& synthetic,
                                 const AttributeConfig& config,
                                 std::uint64_t /*seed*/) {
  config.validate();
  if (train.records.empty() || test.records.empty() ||
      synthetic.records.empty()) {
    throw ValidationError("attribute attack needs non-empty corpora");
  }
  std::vector<FlatRecord> train_flat = flatten_all(train);
  std::vector<FlatRecord> test_flat = flatten_all(test);
  std::vector<FlatRecord> synth_flat = flatten_all(synthetic);

  // Rank the full event vocabulary by train-record frequency; ties in
  // canonical (kind, code) order.
  std::vector<std::pair<int, int>> all_codes;
  const data::Kind kinds[3] = {data::Kind::kSymptom, data::Kind::kDiagnosis,
                               data::Kind::kMedication};
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < train.vocabs.of(kinds[k]).size(); ++c) {
      all_codes.emplace_back(k, c);
    }
  }
  std::vector<std::size_t> counts(all_codes.size(), 0);
  for (const auto& rec : train_flat) {
    for (std::size_t i = 0; i < all_codes.size(); ++i) {
      if (rec.items.count(all_codes[i])) ++counts[i];
    }
  }
  std::vector<std::size_t> order(all_codes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return all_codes[a] < all_codes[b];
  });
  const std::size_t n_common = static_cast<std::size_t>(
      config.common_fraction * static_cast<double>(all_codes.size()));
  if (n_common < 1 || n_common >= all_codes.size()) {
    throw ParameterError(
        "attribute attack: common/sensitive split is degenerate");
  }
  std::set<std::pair<int, int>> common;
  for (std::size_t i = 0; i < n_common; ++i) common.insert(all_codes[order[i]]);

  AttributeResult result;
  result.common_codes = n_common;
  result.sensitive_codes = all_codes.size() - n_common;
  result.f1 = attribute_f1(train_flat, synth_flat, common);
  result.baseline_f1 = attribute_f1(train_flat, test_flat, common);
  return result;
}

}  // namespace msic::privacy
