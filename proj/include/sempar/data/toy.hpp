#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sempar/asdl/grammar.hpp"
#include "sempar/data/dataset.hpp"
#include "sempar/nn/model_config.hpp"
#include "sempar/transition/oracle.hpp"

namespace sempar::data {

// Synthetic home-automation command task: a miniature grammar whose full
// latent space (20 trees) is enumerable, paired with a compositional
// utterance template generator.  Deterministic per seed.
struct ToyTask {
  asdl::AsdlGrammar grammar;
  Dataset train;  // labeled
  Dataset dev;
  Dataset test;

  // every device/room token the grammar's primitive types can take
  transition::TokenCandidates token_pools() const;
};

struct ToySizes {
  int train = 400;
  int dev = 100;
  int test = 100;
};

const std::string& toy_grammar_text();
inline const char* kToyRoot = "cmd";

ToyTask make_toy_task(std::uint64_t seed, const ToySizes& sizes = {});

// Model dimensions + vocabularies derived from a labeled training set: source
// vocabulary from utterances, target from linearized MRs, token from the
// primitive tokens the oracle emits (always including the field terminator).
nn::ModelConfig build_model_config(const asdl::AsdlGrammar& g, mr::MrKind kind,
                                   const std::vector<LabeledExample>& labeled, int embed_dim,
                                   int hidden_dim, int field_type_embed_dim,
                                   double dropout_rate = 0.0);

}  // namespace sempar::data
