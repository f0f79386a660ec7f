#pragma once

#include <stdexcept>

#include "sempar/data/vocab.hpp"

namespace sempar::nn {

// Dimensions and vocabularies shared by the three learned models.
// Defaults are desk-scale; full-scale dims (128/256, field-type 64 or 32)
// are reachable through the same fields.
struct ModelConfig {
  int embed_dim = 32;
  int hidden_dim = 64;
  int field_type_embed_dim = 16;
  double dropout_rate = 0.0;

  data::Vocab source;  // utterance tokens (includes <unk>, <s>, </s>)
  data::Vocab target;  // linearized-MR tokens (includes <unk>, </s>)
  data::Vocab token;   // primitive-value tokens for GenToken (includes <unk> and the field terminator)

  void validate() const {
    if (embed_dim < 1 || hidden_dim < 1 || field_type_embed_dim < 1)
      throw std::logic_error("model dims must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw std::logic_error("dropout rate must be in [0, 1)");
  }
};

}  // namespace sempar::nn
