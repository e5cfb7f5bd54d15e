#pragma once

#include <memory>
#include <string>

#include "msic/model/bootstrap.hpp"
#include "msic/model/model.hpp"
#include "msic/settings.hpp"

namespace msic::train {

/// Binary checkpoint layout (little-endian):
///   8 bytes  magic "MSICCKPT"
///   u32      format version (1)
///   u32      config length, then that many bytes of flat config text
///   4 x u64  FNV-1a digests of the symptom / diagnosis / medication /
///            word vocabularies (codes joined by '\n')
///   u32      tensor count
///   per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank],
///               f32 data in row-major order
/// Tensors are the parameter store in registration order followed by
/// the "stats." bootstrap tensors in name order, so identical models
/// produce byte-identical files.
void save_checkpoint(const std::string& path, const model::MsicModelF& model,
                     const model::BootstrapStats& stats,
                     const Settings& settings);

struct LoadedCheckpoint {
  Settings settings;
  std::unique_ptr<model::MsicModelF> model;
  model::BootstrapStats stats;
};

/// Rebuilds the model from the embedded config snapshot and restores
/// every tensor. The supplied vocabularies must match the recorded
/// digests (ValidationError otherwise); truncated or malformed files
/// raise ParseError.
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const data::VocabSet& vocabs);

}  // namespace msic::train
