#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "msic/core/errors.hpp"
#include "msic/data/corpus.hpp"

namespace msic::privacy {

/// A patient record flattened to its set of (kind, code) event items,
/// the unit of comparison for both attacks.
struct FlatRecord {
  std::string patient_id;
  std::set<std::pair<int, int>> items;
};

FlatRecord flatten(const data::PatientRecord& record);

/// 1 - |intersection| / |union|; two empty records are at distance 0.
double jaccard_distance(const FlatRecord& a, const FlatRecord& b);

struct MembershipConfig {
  int sample_per_side = 500;          // records drawn from train and test
  double calibration_fraction = 0.2;  // share reserved for threshold fitting
  double fixed_tau = -1.0;            // >= 0 skips calibration

  void validate() const {
    if (sample_per_side < 1) {
      throw ConfigError("attack.membership_sample must be >= 1");
    }
    if (calibration_fraction <= 0.0 || calibration_fraction >= 1.0) {
      throw ConfigError("attack.calibration_fraction must lie in (0, 1)");
    }
    if (fixed_tau > 1.0) {
      throw ConfigError("attack.fixed_tau must lie in [0, 1] (or < 0 to calibrate)");
    }
  }
};

struct MembershipResult {
  double tau = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;  // members are the positive class
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t eval_members = 0;
  std::size_t eval_nonmembers = 0;
};

/// Distance-to-nearest-synthetic membership inference. Samples up to
/// `sample_per_side` records from each side, computes each record's
/// nearest-synthetic Jaccard distance (ties to the lowest synthetic
/// index), calibrates tau as the median nearest distance of a held-out
/// calibration share, and classifies the rest as members iff their
/// distance is <= tau. Deterministic given the seed.
MembershipResult membership_attack(const data::Corpus& train,
                                   const data::Corpus& test,
                                   const data::Corpus& synthetic,
                                   const MembershipConfig& config,
                                   std::uint64_t seed);

struct AttributeConfig {
  double common_fraction = 0.2;  // top share of codes treated as known

  void validate() const {
    if (common_fraction <= 0.0 || common_fraction >= 1.0) {
      throw ConfigError("attack.common_fraction must lie in (0, 1)");
    }
  }
};

struct AttributeResult {
  double f1 = 0.0;           // micro-F1 over sensitive codes, vs synthetic
  double baseline_f1 = 0.0;  // same attack run against real test records
  std::size_t common_codes = 0;
  std::size_t sensitive_codes = 0;
};

/// Attribute inference: codes are split into "common" (the top
/// common_fraction of the full event vocabulary by train-record
/// frequency, ties to the canonical (kind, code) order) and
/// "sensitive" (the rest). For each train record the attacker finds
/// the synthetic record sharing the most common codes (ties to the
/// lowest index) and predicts its sensitive codes. baseline_f1 runs
/// the identical procedure against the real test records. Throws
/// ParameterError when the split would leave no common or no
/// sensitive codes.
AttributeResult attribute_attack(const data::Corpus& train,
                                 const data::Corpus& test,
                                 const data::Corpus& synthetic,
                                 const AttributeConfig& config,
                                 std::uint64_t seed);

}  // namespace msic::privacy
