#pragma once

#include <cstdint>

#include "msic/core/rng.hpp"
#include "msic/data/vocab.hpp"
#include "msic/model/config.hpp"
#include "msic/model/event_synthesis.hpp"
#include "msic/model/report_generation.hpp"
#include "msic/model/state_inference.hpp"
#include "msic/nn/params.hpp"

namespace msic::model {

/// The full model: visit-history inference, event decoders, and the
/// deliberative report generators, all registered in one parameter
/// store. Construction is deterministic given (config, vocabs, seed).
template <typename S>
class MsicModel {
 public:
  MsicModel(const ModelConfig& cfg, const data::VocabSet& vocabs,
            std::uint64_t init_seed)
      : cfg_((cfg.validate(), cfg)),
        vocabs_(vocabs),
        init_rng_(init_seed),
        state_(store_, cfg_, vocabs_, init_rng_),
        events_(store_, cfg_, vocabs_, init_rng_),
        reports_(store_, cfg_, vocabs_.word, init_rng_) {}

  MsicModel(const MsicModel&) = delete;
  MsicModel& operator=(const MsicModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const data::VocabSet& vocabs() const { return vocabs_; }
  num::ParamStore<S>& params() { return store_; }
  const num::ParamStore<S>& params() const { return store_; }

  const StateInference<S>& state() const { return state_; }
  const EventSynthesis<S>& events() const { return events_; }
  const ReportGeneration<S>& reports() const { return reports_; }

 private:
  ModelConfig cfg_;
  data::VocabSet vocabs_;
  num::ParamStore<S> store_;
  Rng init_rng_;
  StateInference<S> state_;
  EventSynthesis<S> events_;
  ReportGeneration<S> reports_;
};

using MsicModelF = MsicModel<float>;

}  // namespace msic::model
