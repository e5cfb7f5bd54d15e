#include "msic/cli/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msic/core/log.hpp"
#include "msic/data/corpus.hpp"
#include "msic/data/planted.hpp"
#include "msic/data/split.hpp"
#include "msic/eval/baselines.hpp"
#include "msic/eval/frequency.hpp"
#include "msic/eval/metric_report.hpp"
#include "msic/eval/report_eval.hpp"
#include "msic/eval/utility.hpp"
#include "msic/model/synthesis.hpp"
#include "msic/privacy/attacks.hpp"
#include "msic/settings.hpp"
#include "msic/train/checkpoint.hpp"
#include "msic/train/trainer.hpp"

namespace msic::cli {
namespace {

/// Options shared by every subcommand.
struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool desk_scale = false;
  bool dump_config = false;
  int threads = 1;
};

void add_global_options(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Key-value configuration file");
  cmd->add_option("--seed", args.seed, "Random seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_flag("--desk-scale", args.desk_scale,
                "Small-dimension profile for laptop-class runs");
  cmd->add_flag("--dump-config", args.dump_config,
                "Print the effective configuration and exit");
  cmd->add_option("--threads", args.threads,
                  "Worker threads (this build computes single-threaded)")
      ->check(CLI::PositiveNumber);
}

/// Defaults -> desk profile -> config file -> --seed, in that order,
/// so explicit configuration always beats the profile.
Settings effective_settings(const GlobalArgs& args) {
  Settings settings;
  if (args.desk_scale) apply_desk_scale(settings);
  if (!args.config_path.empty()) {
    apply_config(settings, KvConfig::parse_file(args.config_path));
  }
  if (args.seed_given) settings.seed = args.seed;
  settings.validate();
  return settings;
}

/// True when the settings were dumped instead of running the command.
bool maybe_dump(const GlobalArgs& args, const Settings& settings) {
  if (!args.dump_config) return false;
  std::cout << dump_settings(settings);
  return true;
}

std::string strip_jsonl(const std::string& path) {
  const std::string suffix = ".jsonl";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size());
  }
  return path;
}

const char* vocab_suffix(data::Kind kind) {
  switch (kind) {
    case data::Kind::kSymptom: return ".symptom.vocab";
    case data::Kind::kDiagnosis: return ".diagnosis.vocab";
    case data::Kind::kMedication: return ".medication.vocab";
    default: return ".word.vocab";
  }
}

void save_vocab_set(const data::VocabSet& vocabs, const std::string& prefix) {
  for (data::Kind k : {data::Kind::kSymptom, data::Kind::kDiagnosis,
                       data::Kind::kMedication, data::Kind::kWord}) {
    data::save_vocabulary(vocabs.of(k), prefix + vocab_suffix(k));
  }
}

data::VocabSet load_vocab_set(const std::string& prefix) {
  data::VocabSet vocabs;
  vocabs.symptom = data::load_vocabulary(prefix + vocab_suffix(data::Kind::kSymptom),
                                         data::Kind::kSymptom);
  vocabs.diagnosis = data::load_vocabulary(
      prefix + vocab_suffix(data::Kind::kDiagnosis), data::Kind::kDiagnosis);
  vocabs.medication = data::load_vocabulary(
      prefix + vocab_suffix(data::Kind::kMedication), data::Kind::kMedication);
  vocabs.word = data::load_vocabulary(prefix + vocab_suffix(data::Kind::kWord),
                                      data::Kind::kWord);
  return vocabs;
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw ConfigError(std::string(flag) + " is required");
  }
  return value;
}

std::size_t visit_count(const data::Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& rec : corpus.records) n += rec.visits.size();
  return n;
}

std::string hex_digest(std::uint64_t digest) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(digest));
  return buffer;
}

void add_corpus_metadata(eval::MetricReport& report, const char* label,
                         const std::string& path,
                         const data::Corpus& corpus) {
  report.metadata[std::string(label) + "_path"] = path;
  report.metadata[std::string(label) + "_patients"] =
      std::to_string(corpus.records.size());
  report.metadata[std::string(label) + "_visits"] =
      std::to_string(visit_count(corpus));
}

void add_vocab_metadata(eval::MetricReport& report,
                        const data::VocabSet& vocabs) {
  report.metadata["digest_symptom"] = hex_digest(vocabs.symptom.digest());
  report.metadata["digest_diagnosis"] = hex_digest(vocabs.diagnosis.digest());
  report.metadata["digest_medication"] =
      hex_digest(vocabs.medication.digest());
  report.metadata["digest_word"] = hex_digest(vocabs.word.digest());
}

void print_metric(const std::string& name, const eval::MetricValue& value) {
  if (value.has_value()) {
    std::printf("%s = %.6f\n", name.c_str(), *value.value);
  } else {
    std::printf("%s = null (%s)\n", name.c_str(), value.reason.c_str());
  }
}

model::SynthesisOptions synthesis_options(const Settings& settings) {
  model::SynthesisOptions opts;
  opts.sampling = settings.sampling;
  opts.with_reports = settings.synth_reports;
  opts.report_decode = settings.report_decode;
  opts.temperature = settings.report_temperature;
  return opts;
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  GlobalArgs global;
  std::string out_path;
  std::string vocab_prefix;
  bool split = false;
};

int run_gen_data(const GenDataArgs& args) {
  Settings settings = effective_settings(args.global);
  if (maybe_dump(args.global, settings)) return 0;
  const std::string out = require(args.out_path, "--out");

  data::Corpus corpus =
      data::generate_planted_corpus(settings.data, settings.seed);
  data::save_corpus(corpus, out);
  const std::string prefix =
      args.vocab_prefix.empty() ? strip_jsonl(out) : args.vocab_prefix;
  save_vocab_set(corpus.vocabs, prefix);
  std::printf("wrote %zu patients (%zu visits) to %s\n",
              corpus.records.size(), visit_count(corpus), out.c_str());
  std::printf("vocabularies: %s{%s,%s,%s,%s}\n", prefix.c_str(),
              ".symptom.vocab", ".diagnosis.vocab", ".medication.vocab",
              ".word.vocab");

  if (args.split) {
    data::SplitResult split = data::split_corpus(
        corpus,
        {settings.train_ratio, settings.valid_ratio, settings.test_ratio},
        settings.seed);
    const std::string stem = strip_jsonl(out);
    const struct {
      const char* name;
      const data::Corpus* part;
    } parts[] = {{"train", &split.train},
                 {"valid", &split.valid},
                 {"test", &split.test}};
    for (const auto& [name, part] : parts) {
      const std::string part_stem = stem + "." + name;
      data::save_corpus(*part, part_stem + ".jsonl");
      save_vocab_set(corpus.vocabs, part_stem);
      std::printf("split %s: %zu patients -> %s.jsonl\n", name,
                  part->records.size(), part_stem.c_str());
    }
  }
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  GlobalArgs global;
  std::string corpus_path;
  std::string vocab_prefix;
  std::string out_path;
  std::string telemetry_path;
};

int run_train(const TrainArgs& args) {
  Settings settings = effective_settings(args.global);
  if (maybe_dump(args.global, settings)) return 0;
  const std::string corpus_path = require(args.corpus_path, "--corpus");
  const std::string out = require(args.out_path, "--out");

  // Check the corpus before its (derived) vocabulary paths so a missing
  // corpus is reported by its own name.
  if (!std::ifstream(corpus_path).good()) {
    throw ParseError("cannot open corpus file: " + corpus_path);
  }
  const std::string prefix = args.vocab_prefix.empty()
                                 ? strip_jsonl(corpus_path)
                                 : args.vocab_prefix;
  data::VocabSet vocabs = load_vocab_set(prefix);
  data::Corpus corpus = data::parse_corpus(corpus_path, vocabs);
  if (corpus.records.empty()) {
    throw ValidationError("training corpus is empty: " + corpus_path);
  }

  settings.train.seed = settings.seed;
  model::MsicModelF model(settings.model, corpus.vocabs, settings.seed);
  std::printf("model: %zu parameters, %zu patients, %zu visits\n",
              model.params().scalar_count(), corpus.records.size(),
              visit_count(corpus));

  std::ofstream telemetry;
  if (!args.telemetry_path.empty()) {
    telemetry.open(args.telemetry_path, std::ios::binary);
    if (!telemetry) {
      throw ValidationError("cannot open telemetry file: " +
                            args.telemetry_path);
    }
  }
  train::Trainer<float> trainer(model, settings.train);
  std::vector<train::EpochSummary> summaries =
      trainer.fit(corpus, telemetry.is_open() ? &telemetry : nullptr);

  model::BootstrapStats stats = model::BootstrapStats::from_corpus(corpus);
  train::save_checkpoint(out, model, stats, settings);
  if (summaries.empty()) {
    std::printf("trained 0 epochs (checkpoint holds initialization): %s\n",
                out.c_str());
  } else {
    std::printf("trained %d epochs, final loss %.6f, checkpoint %s\n",
                summaries.back().epoch, summaries.back().loss_total,
                out.c_str());
  }
  return 0;
}

// -------------------------------------------------------------- synthesize

struct SynthesizeArgs {
  GlobalArgs global;
  std::string checkpoint_path;
  std::string mode = "de-novo";
  std::string out_path;
  std::string corpus_path;
  std::string vocab_prefix;
  std::optional<int> count;
  std::optional<int> horizon;
  std::optional<int> extend;
  std::string strategy;
  std::optional<double> threshold;
  std::optional<int> top_k;
  bool reports = false;
  std::string decode;
  std::optional<double> temperature;
};

int run_synthesize(const SynthesizeArgs& args) {
  Settings settings = effective_settings(args.global);
  if (maybe_dump(args.global, settings)) return 0;
  const std::string ckpt_path = require(args.checkpoint_path, "--checkpoint");
  const std::string out = require(args.out_path, "--out");

  if (args.count) settings.synth_count = *args.count;
  if (args.horizon) settings.synth_horizon = *args.horizon;
  if (args.extend) settings.synth_extend = *args.extend;
  if (args.reports) settings.synth_reports = true;
  if (!args.strategy.empty()) {
    settings.sampling.strategy =
        model::sampling_strategy_from_name(args.strategy);
  }
  if (args.threshold) settings.sampling.threshold = *args.threshold;
  if (args.top_k) settings.sampling.top_k = *args.top_k;
  if (!args.decode.empty()) {
    if (args.decode == "greedy") {
      settings.report_decode = model::ReportDecode::kGreedy;
    } else if (args.decode == "sample") {
      settings.report_decode = model::ReportDecode::kSample;
    } else {
      throw ConfigError("--decode must be 'greedy' or 'sample'");
    }
  }
  if (args.temperature) settings.report_temperature = *args.temperature;
  settings.validate();

  std::string prefix = args.vocab_prefix;
  if (prefix.empty()) {
    if (args.corpus_path.empty()) {
      throw ConfigError(
          "--vocab-prefix is required when no --corpus supplies one");
    }
    prefix = strip_jsonl(args.corpus_path);
  }
  data::VocabSet vocabs = load_vocab_set(prefix);
  train::LoadedCheckpoint loaded = train::load_checkpoint(ckpt_path, vocabs);
  model::SynthesisOptions opts = synthesis_options(settings);

  data::Corpus synthetic;
  if (args.mode == "de-novo") {
    synthetic = model::synthesize_corpus(*loaded.model, loaded.stats,
                                         settings.synth_count,
                                         settings.synth_horizon, opts,
                                         settings.seed);
  } else if (args.mode == "cross-type") {
    const std::string base = require(args.corpus_path, "--corpus");
    data::Corpus real = data::parse_corpus(base, vocabs);
    synthetic = model::cross_type_corpus(*loaded.model, real, opts,
                                         settings.seed);
  } else if (args.mode == "longitudinal") {
    const std::string base = require(args.corpus_path, "--corpus");
    data::Corpus real = data::parse_corpus(base, vocabs);
    synthetic = model::extend_corpus(*loaded.model, real,
                                     settings.synth_extend, opts,
                                     settings.seed);
  } else {
    throw ConfigError(
        "--mode must be one of de-novo, cross-type, longitudinal");
  }

  data::save_corpus(synthetic, out);
  std::printf("%s synthesis: %zu patients (%zu visits) -> %s\n",
              args.mode.c_str(), synthetic.records.size(),
              visit_count(synthetic), out.c_str());
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  GlobalArgs global;
  std::string real_path;
  std::string synthetic_path;
  std::string vocab_prefix;
  std::string checkpoint_path;
  std::string metrics = "unigram,bigram,seq-bigram,dimwise";
  std::string out_path;
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_evaluate(const EvaluateArgs& args) {
  Settings settings = effective_settings(args.global);
  if (maybe_dump(args.global, settings)) return 0;
  const std::string real_path = require(args.real_path, "--real");
  const std::string synthetic_path =
      require(args.synthetic_path, "--synthetic");

  const std::string prefix = args.vocab_prefix.empty()
                                 ? strip_jsonl(real_path)
                                 : args.vocab_prefix;
  data::VocabSet vocabs = load_vocab_set(prefix);
  data::Corpus real = data::parse_corpus(real_path, vocabs);
  data::Corpus synthetic = data::parse_corpus(synthetic_path, vocabs);

  eval::MetricReport report;
  report.metadata["command"] = "evaluate";
  report.metadata["seed"] = std::to_string(settings.seed);
  add_corpus_metadata(report, "real", real_path, real);
  add_corpus_metadata(report, "synthetic", synthetic_path, synthetic);
  add_vocab_metadata(report, vocabs);

  for (const std::string& metric : split_csv(args.metrics)) {
    if (metric == "unigram") {
      report.set("unigram_r2",
                 eval::similarity_score(
                     eval::FrequencyProfile::unigram(real),
                     eval::FrequencyProfile::unigram(synthetic)));
    } else if (metric == "bigram") {
      report.set("bigram_r2",
                 eval::similarity_score(
                     eval::FrequencyProfile::bigram(real),
                     eval::FrequencyProfile::bigram(synthetic)));
    } else if (metric == "seq-bigram") {
      report.set("seq_bigram_r2",
                 eval::similarity_score(
                     eval::FrequencyProfile::sequential_bigram(real),
                     eval::FrequencyProfile::sequential_bigram(synthetic)));
    } else if (metric == "dimwise") {
      report.set("dimwise_pearson", eval::dimwise_fidelity(real, synthetic));
    } else if (metric == "utility") {
      eval::UtilityResult utility =
          eval::utility_eval(synthetic, real, settings.utility);
      report.set("utility_jaccard", utility.jaccard);
      report.set("utility_f1", utility.micro_f1);
      report.metadata["utility_train_pairs"] =
          std::to_string(utility.train_pairs);
      report.metadata["utility_eval_pairs"] =
          std::to_string(utility.eval_pairs);
    } else if (metric == "reports") {
      const std::string ckpt =
          require(args.checkpoint_path, "--checkpoint (for 'reports')");
      train::LoadedCheckpoint loaded =
          train::load_checkpoint(ckpt, vocabs);
      eval::ReportEvalResult scores = eval::report_eval(
          *loaded.model, real, synthesis_options(settings), settings.seed);
      report.set("report_draft_bleu1", scores.draft_bleu1);
      report.set("report_draft_bleu2", scores.draft_bleu2);
      report.set("report_polish_bleu1", scores.polish_bleu1);
      report.set("report_polish_bleu2", scores.polish_bleu2);
      report.set("report_draft_rouge1", scores.draft_rouge1);
      report.set("report_draft_rouge2", scores.draft_rouge2);
      report.set("report_draft_rougeL", scores.draft_rouge_l);
      report.set("report_polish_rouge1", scores.polish_rouge1);
      report.set("report_polish_rouge2", scores.polish_rouge2);
      report.set("report_polish_rougeL", scores.polish_rouge_l);
      report.metadata["report_paragraphs"] =
          std::to_string(scores.paragraphs);
    } else {
      throw ConfigError("unknown metric '" + metric +
                        "' (expected unigram, bigram, seq-bigram, dimwise, "
                        "utility, reports)");
    }
  }

  for (const auto& [name, value] : report.metrics) print_metric(name, value);
  if (!args.out_path.empty()) {
    report.save(args.out_path);
    std::printf("report -> %s\n", args.out_path.c_str());
  }
  return 0;
}

// ------------------------------------------------------------------ attack

struct AttackArgs {
  GlobalArgs global;
  std::string train_path;
  std::string test_path;
  std::string synthetic_path;
  std::string vocab_prefix;
  std::string attack = "both";
  std::string out_path;
};

int run_attack(const AttackArgs& args) {
  Settings settings = effective_settings(args.global);
  if (maybe_dump(args.global, settings)) return 0;
  const std::string train_path = require(args.train_path, "--train");
  const std::string test_path = require(args.test_path, "--test");
  const std::string synthetic_path =
      require(args.synthetic_path, "--synthetic");
  if (args.attack != "membership" && args.attack != "attribute" &&
      args.attack != "both") {
    throw ConfigError("--attack must be membership, attribute, or both");
  }

  const std::string prefix = args.vocab_prefix.empty()
                                 ? strip_jsonl(train_path)
                                 : args.vocab_prefix;
  data::VocabSet vocabs = load_vocab_set(prefix);
  data::Corpus train = data::parse_corpus(train_path, vocabs);
  data::Corpus test = data::parse_corpus(test_path, vocabs);
  data::Corpus synthetic = data::parse_corpus(synthetic_path, vocabs);

  eval::MetricReport report;
  report.metadata["command"] = "attack";
  report.metadata["seed"] = std::to_string(settings.seed);
  add_corpus_metadata(report, "train", train_path, train);
  add_corpus_metadata(report, "test", test_path, test);
  add_corpus_metadata(report, "synthetic", synthetic_path, synthetic);
  add_vocab_metadata(report, vocabs);

  if (args.attack == "membership" || args.attack == "both") {
    privacy::MembershipResult result = privacy::membership_attack(
        train, test, synthetic, settings.membership, settings.seed);
    report.set("membership_tau", result.tau);
    report.set("membership_accuracy", result.accuracy);
    report.set("membership_precision", result.precision);
    report.set("membership_recall", result.recall);
    report.set("membership_f1", result.f1);
    report.metadata["membership_eval_members"] =
        std::to_string(result.eval_members);
    report.metadata["membership_eval_nonmembers"] =
        std::to_string(result.eval_nonmembers);
  }
  if (args.attack == "attribute" || args.attack == "both") {
    privacy::AttributeResult result = privacy::attribute_attack(
        train, test, synthetic, settings.attribute, settings.seed);
    report.set("attribute_f1", result.f1);
    report.set("attribute_baseline_f1", result.baseline_f1);
    report.metadata["attribute_common_codes"] =
        std::to_string(result.common_codes);
    report.metadata["attribute_sensitive_codes"] =
        std::to_string(result.sensitive_codes);
  }

  for (const auto& [name, value] : report.metrics) print_metric(name, value);
  if (!args.out_path.empty()) {
    report.save(args.out_path);
    std::printf("report -> %s\n", args.out_path.c_str());
  }
  return 0;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Synthetic EHR generation with multi-visit health-state "
               "inference: data, training, synthesis, evaluation, and "
               "privacy attacks"};
  app.require_subcommand(0, 1);

  GlobalArgs top;
  add_global_options(&app, top);

  GenDataArgs gen_data;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "Generate a planted-rule corpus with gold reports");
  add_global_options(gen, gen_data.global);
  gen->add_option("--out", gen_data.out_path, "Corpus output path (.jsonl)");
  gen->add_option("--vocab-prefix", gen_data.vocab_prefix,
                  "Prefix for vocabulary files (default: output stem)");
  gen->add_flag("--split", gen_data.split,
                "Also write train/valid/test splits next to the corpus");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train the generator on a corpus and write a checkpoint");
  add_global_options(train_cmd, train_args.global);
  train_cmd->add_option("--corpus", train_args.corpus_path,
                        "Training corpus (.jsonl)");
  train_cmd->add_option("--vocab-prefix", train_args.vocab_prefix,
                        "Prefix for vocabulary files (default: corpus stem)");
  train_cmd->add_option("--out", train_args.out_path, "Checkpoint path");
  train_cmd->add_option("--telemetry", train_args.telemetry_path,
                        "Per-epoch loss telemetry (JSON lines)");

  SynthesizeArgs synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synthesize", "Generate synthetic records from a checkpoint");
  add_global_options(synth_cmd, synth.global);
  synth_cmd->add_option("--checkpoint", synth.checkpoint_path,
                        "Trained checkpoint");
  synth_cmd->add_option("--mode", synth.mode,
                        "de-novo | cross-type | longitudinal");
  synth_cmd->add_option("--out", synth.out_path, "Synthetic corpus path");
  synth_cmd->add_option("--corpus", synth.corpus_path,
                        "Base corpus (cross-type and longitudinal modes)");
  synth_cmd->add_option("--vocab-prefix", synth.vocab_prefix,
                        "Prefix for vocabulary files");
  synth_cmd->add_option("--count", synth.count,
                        "Records to generate (de-novo)");
  synth_cmd->add_option("--horizon", synth.horizon,
                        "Visits per record, 0 = sample empirically");
  synth_cmd->add_option("--extend", synth.extend,
                        "Extra visits per record (longitudinal)");
  synth_cmd->add_option("--strategy", synth.strategy,
                        "Event sampling: bernoulli | threshold | top-k");
  synth_cmd->add_option("--threshold", synth.threshold,
                        "Threshold for threshold sampling");
  synth_cmd->add_option("--top-k", synth.top_k, "K for top-k sampling");
  synth_cmd->add_flag("--reports", synth.reports,
                      "Also generate visit reports");
  synth_cmd->add_option("--decode", synth.decode,
                        "Report decoding: greedy | sample");
  synth_cmd->add_option("--temperature", synth.temperature,
                        "Sampling temperature for report decoding");

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Score a synthetic corpus against a real one");
  add_global_options(eval_cmd, eval_args.global);
  eval_cmd->add_option("--real", eval_args.real_path, "Real corpus (.jsonl)");
  eval_cmd->add_option("--synthetic", eval_args.synthetic_path,
                       "Synthetic corpus (.jsonl)");
  eval_cmd->add_option("--vocab-prefix", eval_args.vocab_prefix,
                       "Prefix for vocabulary files (default: real stem)");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint_path,
                       "Checkpoint (required for the 'reports' metric)");
  eval_cmd->add_option("--metrics", eval_args.metrics,
                       "Comma list: unigram,bigram,seq-bigram,dimwise,"
                       "utility,reports");
  eval_cmd->add_option("--out", eval_args.out_path,
                       "Metric report path (JSON)");

  AttackArgs attack_args;
  CLI::App* attack_cmd = app.add_subcommand(
      "attack", "Run privacy attacks against a synthetic corpus");
  add_global_options(attack_cmd, attack_args.global);
  attack_cmd->add_option("--train", attack_args.train_path,
                         "Corpus the generator was trained on");
  attack_cmd->add_option("--test", attack_args.test_path,
                         "Held-out real corpus");
  attack_cmd->add_option("--synthetic", attack_args.synthetic_path,
                         "Synthetic corpus under attack");
  attack_cmd->add_option("--vocab-prefix", attack_args.vocab_prefix,
                         "Prefix for vocabulary files (default: train stem)");
  attack_cmd->add_option("--attack", attack_args.attack,
                         "membership | attribute | both");
  attack_cmd->add_option("--out", attack_args.out_path,
                         "Metric report path (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) return run_gen_data(gen_data);
  if (train_cmd->parsed()) return run_train(train_args);
  if (synth_cmd->parsed()) return run_synthesize(synth);
  if (eval_cmd->parsed()) return run_evaluate(eval_args);
  if (attack_cmd->parsed()) return run_attack(attack_args);
  if (top.dump_config) {
    std::cout << dump_settings(effective_settings(top));
    return 0;
  }
  std::cout << app.help();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace msic::cli
