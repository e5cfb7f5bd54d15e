#include "msic/train/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "msic/core/errors.hpp"

namespace msic::train {
namespace {

constexpr char kMagic[8] = {'M', 'S', 'I', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError("checkpoint truncated: " + path);
  }
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError("checkpoint truncated: " + path);
  }
  return v;
}

void write_tensor(std::ostream& out, const std::string& name,
                  const std::vector<std::uint32_t>& dims,
                  const float* values, std::size_t count) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) write_u32(out, d);
  out.write(reinterpret_cast<const char*>(values),
            static_cast<std::streamsize>(count * sizeof(float)));
}

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

}  // namespace

void save_checkpoint(const std::string& path, const model::MsicModelF& model,
                     const model::BootstrapStats& stats,
                     const Settings& settings) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  const std::string config = dump_settings(settings);
  write_u32(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  const data::VocabSet& vocabs = model.vocabs();
  write_u64(out, vocabs.symptom.digest());
  write_u64(out, vocabs.diagnosis.digest());
  write_u64(out, vocabs.medication.digest());
  write_u64(out, vocabs.word.digest());

  const auto& entries = model.params().entries();
  const auto stat_tensors = stats.to_tensors();
  write_u32(out,
            static_cast<std::uint32_t>(entries.size() + stat_tensors.size()));
  for (const auto& entry : entries) {
    const auto& value = entry.var.value();
    std::vector<std::uint32_t> dims = {
        static_cast<std::uint32_t>(value.rows()),
        static_cast<std::uint32_t>(value.cols())};
    write_tensor(out, entry.name, dims, value.data(),
                 static_cast<std::size_t>(value.size()));
  }
  for (const auto& [name, values] : stat_tensors) {
    std::vector<std::uint32_t> dims = {
        1u, static_cast<std::uint32_t>(values.size())};
    write_tensor(out, name, dims, values.data(), values.size());
  }
  if (!out) throw ValidationError("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const data::VocabSet& vocabs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint file (bad magic): " + path);
  }
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version) + ": " + path);
  }
  const std::uint32_t config_len = read_u32(in, path);
  std::string config_text(config_len, '\0');
  if (!in.read(config_text.data(), config_len)) {
    throw ParseError("checkpoint truncated: " + path);
  }
  const std::uint64_t digests[4] = {read_u64(in, path), read_u64(in, path),
                                    read_u64(in, path), read_u64(in, path)};
  const data::Vocabulary* vocab_ptrs[4] = {&vocabs.symptom, &vocabs.diagnosis,
                                           &vocabs.medication, &vocabs.word};
  const char* vocab_names[4] = {"symptom", "diagnosis", "medication", "word"};
  for (int i = 0; i < 4; ++i) {
    if (vocab_ptrs[i]->digest() != digests[i]) {
      throw ValidationError(
          std::string("checkpoint vocabulary digest mismatch for ") +
          vocab_names[i] + " vocabulary");
    }
  }

  const std::uint32_t tensor_count = read_u32(in, path);
  std::map<std::string, RawTensor> tensors;
  for (std::uint32_t t = 0; t < tensor_count; ++t) {
    const std::uint32_t name_len = read_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw ParseError("checkpoint truncated: " + path);
    }
    RawTensor raw;
    const std::uint32_t rank = read_u32(in, path);
    std::size_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      raw.dims.push_back(read_u32(in, path));
      count *= raw.dims.back();
    }
    raw.values.resize(count);
    if (!in.read(reinterpret_cast<char*>(raw.values.data()),
                 static_cast<std::streamsize>(count * sizeof(float)))) {
      throw ParseError("checkpoint truncated: " + path);
    }
    if (!tensors.emplace(name, std::move(raw)).second) {
      throw ParseError("duplicate tensor '" + name + "' in " + path);
    }
  }

  LoadedCheckpoint out;
  apply_config(out.settings, KvConfig::parse_string(config_text, path));
  out.model = std::make_unique<model::MsicModelF>(out.settings.model, vocabs,
                                                  out.settings.seed);
  for (const auto& entry : out.model->params().entries()) {
    auto it = tensors.find(entry.name);
    if (it == tensors.end()) {
      throw ValidationError("checkpoint is missing tensor " + entry.name);
    }
    const RawTensor& raw = it->second;
    auto& value = entry.var.node()->value;
    if (raw.dims.size() != 2 ||
        static_cast<Eigen::Index>(raw.dims[0]) != value.rows() ||
        static_cast<Eigen::Index>(raw.dims[1]) != value.cols()) {
      throw ValidationError("checkpoint tensor shape mismatch for " +
                            entry.name);
    }
    std::memcpy(value.data(), raw.values.data(),
                raw.values.size() * sizeof(float));
    tensors.erase(it);
  }
  std::map<std::string, std::vector<float>> stat_tensors;
  for (auto& [name, raw] : tensors) {
    if (name.rfind("stats.", 0) != 0) {
      throw ValidationError("unexpected tensor '" + name + "' in " + path);
    }
    stat_tensors.emplace(name, std::move(raw.values));
  }
  out.stats = model::BootstrapStats::from_tensors(stat_tensors);
  return out;
}

}  // namespace msic::train
