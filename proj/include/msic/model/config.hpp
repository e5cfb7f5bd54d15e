#pragma once

#include "msic/core/errors.hpp"

namespace msic::model {

/// Architecture configuration. Defaults follow the published setup
/// (all dimensions 256); the desk-scale profile swaps in 64.
struct ModelConfig {
  int hidden_dim = 256;  // d: embeddings, encoders, prompts
  int latent_dim = 256;  // d_h: health-state Gaussian
  int encoder_layers = 2;
  int encoder_heads = 4;
  int decoder_layers = 2;
  int decoder_heads = 4;
  int ff_multiplier = 4;
  int max_visits = 16;      // position-table capacity of history attention
  int max_report_len = 32;  // token cap per report paragraph

  // Structure flags.
  bool share_g_attn = false;        // one g_attn across event kinds
  bool initial_history_key = true;  // learned h0 key inside g_attn

  // Ablation switches mirroring the published model variants.
  bool ablate_health_state = false;  // "w/o h_t": zero state, no KL
  bool ablate_multi_visit = false;   // "w/o MV": histories cut to length 1
  bool ablate_deliberation = false;  // "w/o MA": drafts only, no polish

  void validate() const {
    if (hidden_dim < 1 || latent_dim < 1) {
      throw ConfigError("model dims must be positive");
    }
    if (encoder_layers < 1 || decoder_layers < 1) {
      throw ConfigError("model layer counts must be positive");
    }
    if (encoder_heads < 1 || hidden_dim % encoder_heads != 0 ||
        decoder_heads < 1 || hidden_dim % decoder_heads != 0) {
      throw ConfigError("head counts must divide hidden_dim");
    }
    if (ff_multiplier < 1) throw ConfigError("ff_multiplier must be >= 1");
    if (max_visits < 1) throw ConfigError("max_visits must be >= 1");
    if (max_report_len < 1) throw ConfigError("max_report_len must be >= 1");
  }
};

}  // namespace msic::model
