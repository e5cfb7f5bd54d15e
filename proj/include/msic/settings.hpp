#pragma once

#include <cstdint>
#include <string>

#include "msic/core/kvconfig.hpp"
#include "msic/data/planted.hpp"
#include "msic/eval/utility.hpp"
#include "msic/model/config.hpp"
#include "msic/model/event_synthesis.hpp"
#include "msic/model/synthesis.hpp"
#include "msic/privacy/attacks.hpp"
#include "msic/train/config.hpp"

namespace msic {

/// Everything configurable through flat key-value files. Defaults are
/// the published full-scale settings; `apply_desk_scale` switches the
/// model and optimizer to the reduced profile for laptop-class runs.
struct Settings {
  model::ModelConfig model;
  train::TrainConfig train;
  data::PlantedConfig data;
  double train_ratio = 0.8;
  double valid_ratio = 0.1;
  double test_ratio = 0.1;
  model::SamplingConfig sampling;
  int synth_count = 500;
  int synth_horizon = 0;  // 0: sample record lengths empirically
  int synth_extend = 1;   // extra visits in longitudinal mode
  bool synth_reports = false;
  model::ReportDecode report_decode = model::ReportDecode::kGreedy;
  double report_temperature = 1.0;
  privacy::MembershipConfig membership;
  privacy::AttributeConfig attribute;
  eval::UtilityConfig utility;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Applies entries onto `settings`; unknown keys raise ConfigError
/// naming the key and source line.
void apply_config(Settings& settings, const KvConfig& config);

/// Reduced profile: dimensions 64 and a desk-friendly learning rate.
void apply_desk_scale(Settings& settings);

/// Canonical flat dump (sorted keys); parseable by apply_config and
/// embedded verbatim in checkpoints.
std::string dump_settings(const Settings& settings);

}  // namespace msic
