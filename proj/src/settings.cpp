#include "msic/settings.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "msic/core/errors.hpp"

namespace msic {
namespace {

std::vector<std::pair<int, int>> to_rule_table(const KvConfig::Entry& e) {
  // "0:3,1:4" -> {(0,3), (1,4)}
  std::vector<std::pair<int, int>> out;
  std::string value = e.value;
  if (value.empty()) return out;
  std::istringstream in(value);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config key '" + e.key +
                        "': expected src:dst pairs, got '" + part + "'");
    }
    try {
      out.emplace_back(std::stoi(part.substr(0, colon)),
                       std::stoi(part.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + e.key +
                        "': expected src:dst pairs, got '" + part + "'");
    }
  }
  return out;
}

std::string rule_table_text(const std::vector<std::pair<int, int>>& rules) {
  std::string out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(rules[i].first) + ":" +
           std::to_string(rules[i].second);
  }
  return out;
}

using Setter = std::function<void(Settings&, const KvConfig::Entry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.hidden_dim",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.hidden_dim = KvConfig::to_int(e);
       }},
      {"model.latent_dim",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.latent_dim = KvConfig::to_int(e);
       }},
      {"model.encoder_layers",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.encoder_layers = KvConfig::to_int(e);
       }},
      {"model.encoder_heads",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.encoder_heads = KvConfig::to_int(e);
       }},
      {"model.decoder_layers",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.decoder_layers = KvConfig::to_int(e);
       }},
      {"model.decoder_heads",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.decoder_heads = KvConfig::to_int(e);
       }},
      {"model.ff_multiplier",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.ff_multiplier = KvConfig::to_int(e);
       }},
      {"model.max_visits",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.max_visits = KvConfig::to_int(e);
       }},
      {"model.max_report_len",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.max_report_len = KvConfig::to_int(e);
       }},
      {"model.share_g_attn",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.share_g_attn = KvConfig::to_bool(e);
       }},
      {"model.initial_history_key",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.initial_history_key = KvConfig::to_bool(e);
       }},
      {"model.ablate_health_state",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.ablate_health_state = KvConfig::to_bool(e);
       }},
      {"model.ablate_multi_visit",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.ablate_multi_visit = KvConfig::to_bool(e);
       }},
      {"model.ablate_deliberation",
       [](Settings& s, const KvConfig::Entry& e) {
         s.model.ablate_deliberation = KvConfig::to_bool(e);
       }},
      {"train.epochs",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.epochs = KvConfig::to_int(e);
       }},
      {"train.event_only_epochs",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.event_only_epochs = KvConfig::to_int(e);
       }},
      {"train.encoder_warmup_epochs",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.encoder_warmup_epochs = KvConfig::to_int(e);
       }},
      {"train.batch_size",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.batch_size = KvConfig::to_int(e);
       }},
      {"train.lr",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.learning_rate = KvConfig::to_double(e);
       }},
      {"train.learning_rate",  // long-form alias of train.lr
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.learning_rate = KvConfig::to_double(e);
       }},
      {"train.warmup_fraction",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.warmup_fraction = KvConfig::to_double(e);
       }},
      {"train.telemetry_reports",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.telemetry_reports = KvConfig::to_bool(e);
       }},
      {"train.grad_clip",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.grad_clip = KvConfig::to_double(e);
       }},
      {"train.adam_beta1",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.adam_beta1 = KvConfig::to_double(e);
       }},
      {"train.adam_beta2",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.adam_beta2 = KvConfig::to_double(e);
       }},
      {"train.adam_eps",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.adam_eps = KvConfig::to_double(e);
       }},
      {"train.lambda_s",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.s = KvConfig::to_double(e);
       }},
      {"train.lambda_d",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.d = KvConfig::to_double(e);
       }},
      {"train.lambda_m",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.m = KvConfig::to_double(e);
       }},
      {"train.lambda_y_s",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.y_s = KvConfig::to_double(e);
       }},
      {"train.lambda_y_d",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.y_d = KvConfig::to_double(e);
       }},
      {"train.lambda_y_m",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.y_m = KvConfig::to_double(e);
       }},
      {"train.lambda_kl",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train.weights.kl = KvConfig::to_double(e);
       }},
      {"data.symptom_vocab",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.symptom_vocab = KvConfig::to_int(e);
       }},
      {"data.diagnosis_vocab",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.diagnosis_vocab = KvConfig::to_int(e);
       }},
      {"data.medication_vocab",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.medication_vocab = KvConfig::to_int(e);
       }},
      {"data.patients",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.patients = KvConfig::to_int(e);
       }},
      {"data.mean_visits",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.mean_visits = KvConfig::to_double(e);
       }},
      {"data.min_visits",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.min_visits = KvConfig::to_int(e);
       }},
      {"data.max_visits",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.max_visits = KvConfig::to_int(e);
       }},
      {"data.noise",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.noise = KvConfig::to_double(e);
       }},
      {"data.extra_rate",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.extra_rate = KvConfig::to_double(e);
       }},
      {"data.progression_prob",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.progression_prob = KvConfig::to_double(e);
       }},
      {"data.base_symptoms_min",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.base_symptoms_min = KvConfig::to_int(e);
       }},
      {"data.base_symptoms_max",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.base_symptoms_max = KvConfig::to_int(e);
       }},
      {"data.with_reports",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.with_reports = KvConfig::to_bool(e);
       }},
      {"data.sym_to_diag",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.sym_to_diag = to_rule_table(e);
       }},
      {"data.diag_to_med",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.diag_to_med = to_rule_table(e);
       }},
      {"data.diag_to_next_sym",
       [](Settings& s, const KvConfig::Entry& e) {
         s.data.diag_to_next_sym = to_rule_table(e);
       }},
      {"data.train_ratio",
       [](Settings& s, const KvConfig::Entry& e) {
         s.train_ratio = KvConfig::to_double(e);
       }},
      {"data.valid_ratio",
       [](Settings& s, const KvConfig::Entry& e) {
         s.valid_ratio = KvConfig::to_double(e);
       }},
      {"data.test_ratio",
       [](Settings& s, const KvConfig::Entry& e) {
         s.test_ratio = KvConfig::to_double(e);
       }},
      {"sampling.strategy",
       [](Settings& s, const KvConfig::Entry& e) {
         s.sampling.strategy = model::sampling_strategy_from_name(e.value);
       }},
      {"sampling.threshold",
       [](Settings& s, const KvConfig::Entry& e) {
         s.sampling.threshold = KvConfig::to_double(e);
       }},
      {"sampling.top_k",
       [](Settings& s, const KvConfig::Entry& e) {
         s.sampling.top_k = KvConfig::to_int(e);
       }},
      {"synth.count",
       [](Settings& s, const KvConfig::Entry& e) {
         s.synth_count = KvConfig::to_int(e);
       }},
      {"synth.horizon",
       [](Settings& s, const KvConfig::Entry& e) {
         s.synth_horizon = KvConfig::to_int(e);
       }},
      {"synth.extend",
       [](Settings& s, const KvConfig::Entry& e) {
         s.synth_extend = KvConfig::to_int(e);
       }},
      {"synth.reports",
       [](Settings& s, const KvConfig::Entry& e) {
         s.synth_reports = KvConfig::to_bool(e);
       }},
      {"synth.report_decode",
       [](Settings& s, const KvConfig::Entry& e) {
         if (e.value == "greedy") {
           s.report_decode = model::ReportDecode::kGreedy;
         } else if (e.value == "sample") {
           s.report_decode = model::ReportDecode::kSample;
         } else {
           throw ConfigError("config key 'synth.report_decode': expected "
                             "greedy or sample, got '" +
                             e.value + "'");
         }
       }},
      {"synth.temperature",
       [](Settings& s, const KvConfig::Entry& e) {
         s.report_temperature = KvConfig::to_double(e);
       }},
      {"attack.membership_sample",
       [](Settings& s, const KvConfig::Entry& e) {
         s.membership.sample_per_side = KvConfig::to_int(e);
       }},
      {"attack.calibration_fraction",
       [](Settings& s, const KvConfig::Entry& e) {
         s.membership.calibration_fraction = KvConfig::to_double(e);
       }},
      {"attack.fixed_tau",
       [](Settings& s, const KvConfig::Entry& e) {
         s.membership.fixed_tau = KvConfig::to_double(e);
       }},
      {"attack.common_fraction",
       [](Settings& s, const KvConfig::Entry& e) {
         s.attribute.common_fraction = KvConfig::to_double(e);
       }},
      {"utility.iterations",
       [](Settings& s, const KvConfig::Entry& e) {
         s.utility.iterations = KvConfig::to_int(e);
       }},
      {"utility.learning_rate",
       [](Settings& s, const KvConfig::Entry& e) {
         s.utility.learning_rate = KvConfig::to_double(e);
       }},
      {"utility.threshold",
       [](Settings& s, const KvConfig::Entry& e) {
         s.utility.threshold = KvConfig::to_double(e);
       }},
      {"seed",
       [](Settings& s, const KvConfig::Entry& e) {
         s.seed = KvConfig::to_uint64(e);
       }},
  };
  return table;
}

}  // namespace

void Settings::validate() const {
  model.validate();
  train.validate();
  data.validate();
  if (train_ratio <= 0 || valid_ratio <= 0 || test_ratio <= 0) {
    throw ConfigError("split ratios must be positive");
  }
  if (std::abs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  sampling.validate(/*vocab_size=*/sampling.top_k < 1 ? 1 : sampling.top_k);
  if (synth_count < 1) throw ConfigError("synth.count must be >= 1");
  if (synth_horizon < 0) throw ConfigError("synth.horizon must be >= 0");
  if (synth_extend < 1) throw ConfigError("synth.extend must be >= 1");
  if (report_temperature <= 0) {
    throw ConfigError("synth.temperature must be positive");
  }
  membership.validate();
  attribute.validate();
  utility.validate();
}

void apply_config(Settings& settings, const KvConfig& config) {
  const auto& table = setters();
  for (const auto& entry : config.entries()) {
    auto it = table.find(entry.key);
    if (it == table.end()) {
      throw ConfigError("unknown config key '" + entry.key + "' (" +
                        config.origin() + ":" + std::to_string(entry.line) +
                        ")");
    }
    it->second(settings, entry);
  }
}

void apply_desk_scale(Settings& settings) {
  settings.model.hidden_dim = 64;
  settings.model.latent_dim = 64;
  settings.train.learning_rate = 1e-3;
}

std::string dump_settings(const Settings& s) {
  std::map<std::string, std::string> kv;
  kv["model.hidden_dim"] = std::to_string(s.model.hidden_dim);
  kv["model.latent_dim"] = std::to_string(s.model.latent_dim);
  kv["model.encoder_layers"] = std::to_string(s.model.encoder_layers);
  kv["model.encoder_heads"] = std::to_string(s.model.encoder_heads);
  kv["model.decoder_layers"] = std::to_string(s.model.decoder_layers);
  kv["model.decoder_heads"] = std::to_string(s.model.decoder_heads);
  kv["model.ff_multiplier"] = std::to_string(s.model.ff_multiplier);
  kv["model.max_visits"] = std::to_string(s.model.max_visits);
  kv["model.max_report_len"] = std::to_string(s.model.max_report_len);
  kv["model.share_g_attn"] = s.model.share_g_attn ? "true" : "false";
  kv["model.initial_history_key"] =
      s.model.initial_history_key ? "true" : "false";
  kv["model.ablate_health_state"] =
      s.model.ablate_health_state ? "true" : "false";
  kv["model.ablate_multi_visit"] =
      s.model.ablate_multi_visit ? "true" : "false";
  kv["model.ablate_deliberation"] =
      s.model.ablate_deliberation ? "true" : "false";
  kv["train.epochs"] = std::to_string(s.train.epochs);
  kv["train.event_only_epochs"] = std::to_string(s.train.event_only_epochs);
  kv["train.encoder_warmup_epochs"] =
      std::to_string(s.train.encoder_warmup_epochs);
  kv["train.batch_size"] = std::to_string(s.train.batch_size);
  kv["train.lr"] = format_double(s.train.learning_rate);
  kv["train.warmup_fraction"] = format_double(s.train.warmup_fraction);
  kv["train.telemetry_reports"] = s.train.telemetry_reports ? "true" : "false";
  kv["train.grad_clip"] = format_double(s.train.grad_clip);
  kv["train.adam_beta1"] = format_double(s.train.adam_beta1);
  kv["train.adam_beta2"] = format_double(s.train.adam_beta2);
  kv["train.adam_eps"] = format_double(s.train.adam_eps);
  kv["train.lambda_s"] = format_double(s.train.weights.s);
  kv["train.lambda_d"] = format_double(s.train.weights.d);
  kv["train.lambda_m"] = format_double(s.train.weights.m);
  kv["train.lambda_y_s"] = format_double(s.train.weights.y_s);
  kv["train.lambda_y_d"] = format_double(s.train.weights.y_d);
  kv["train.lambda_y_m"] = format_double(s.train.weights.y_m);
  kv["train.lambda_kl"] = format_double(s.train.weights.kl);
  kv["data.symptom_vocab"] = std::to_string(s.data.symptom_vocab);
  kv["data.diagnosis_vocab"] = std::to_string(s.data.diagnosis_vocab);
  kv["data.medication_vocab"] = std::to_string(s.data.medication_vocab);
  kv["data.patients"] = std::to_string(s.data.patients);
  kv["data.mean_visits"] = format_double(s.data.mean_visits);
  kv["data.min_visits"] = std::to_string(s.data.min_visits);
  kv["data.max_visits"] = std::to_string(s.data.max_visits);
  kv["data.noise"] = format_double(s.data.noise);
  kv["data.extra_rate"] = format_double(s.data.extra_rate);
  kv["data.progression_prob"] = format_double(s.data.progression_prob);
  kv["data.base_symptoms_min"] = std::to_string(s.data.base_symptoms_min);
  kv["data.base_symptoms_max"] = std::to_string(s.data.base_symptoms_max);
  kv["data.with_reports"] = s.data.with_reports ? "true" : "false";
  kv["data.sym_to_diag"] = rule_table_text(s.data.sym_to_diag);
  kv["data.diag_to_med"] = rule_table_text(s.data.diag_to_med);
  kv["data.diag_to_next_sym"] = rule_table_text(s.data.diag_to_next_sym);
  kv["data.train_ratio"] = format_double(s.train_ratio);
  kv["data.valid_ratio"] = format_double(s.valid_ratio);
  kv["data.test_ratio"] = format_double(s.test_ratio);
  kv["sampling.strategy"] =
      model::sampling_strategy_name(s.sampling.strategy);
  kv["sampling.threshold"] = format_double(s.sampling.threshold);
  kv["sampling.top_k"] = std::to_string(s.sampling.top_k);
  kv["synth.count"] = std::to_string(s.synth_count);
  kv["synth.horizon"] = std::to_string(s.synth_horizon);
  kv["synth.extend"] = std::to_string(s.synth_extend);
  kv["synth.reports"] = s.synth_reports ? "true" : "false";
  kv["synth.report_decode"] =
      s.report_decode == model::ReportDecode::kGreedy ? "greedy" : "sample";
  kv["synth.temperature"] = format_double(s.report_temperature);
  kv["attack.membership_sample"] =
      std::to_string(s.membership.sample_per_side);
  kv["attack.calibration_fraction"] =
      format_double(s.membership.calibration_fraction);
  kv["attack.fixed_tau"] = format_double(s.membership.fixed_tau);
  kv["attack.common_fraction"] = format_double(s.attribute.common_fraction);
  kv["utility.iterations"] = std::to_string(s.utility.iterations);
  kv["utility.learning_rate"] = format_double(s.utility.learning_rate);
  kv["utility.threshold"] = format_double(s.utility.threshold);
  kv["seed"] = std::to_string(s.seed);
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace msic
