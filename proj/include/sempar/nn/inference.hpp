#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/nn/lstm.hpp"
#include "sempar/nn/model_config.hpp"
#include "sempar/nn/param_store.hpp"
#include "sempar/transition/derivation.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

struct ScoredAst {
  asdl::Ast ast;
  double score = 0;  // log-probability under the inference model
};
using SampleSet = std::vector<ScoredAst>;

// Transition-based parser scoring action sequences with an
// encoder-decoder: the utterance is encoded with a BiLSTM; the decoder state
// advances as s_t = f_LSTM([a_{t-1} : s~_{t-1} : p_t], s_{t-1}) where p_t
// concatenates the frontier-field embedding, its type embedding, the decoder
// state at the step whose ApplyConstr created the field, and that parent
// constructor's embedding.  Action logits are masked to the legal action set
// of the current frontier before normalization, so illegal actions carry
// exactly zero probability.
class InferenceModel {
 public:
  InferenceModel(const ModelConfig& config, const asdl::AsdlGrammar& grammar);

  void init(ParamStore& store, util::Rng& rng) const;

  // log q(z | x) via the oracle action sequence of z; throws on
  // nonconforming z.  Gradient-free.
  double log_prob(const ParamStore& store, const std::vector<std::string>& x,
                  const asdl::Ast& z) const;
  double actions_log_prob(const ParamStore& store, const std::vector<std::string>& x,
                          const std::vector<transition::Action>& actions) const;

  // Differentiable variant over an explicit action sequence.
  Var log_prob_var(Tape& t, ParamStore& store, const std::vector<std::string>& x,
                   const std::vector<transition::Action>& actions,
                   util::Rng* dropout_rng = nullptr, bool train = false) const;

  // Top-scoring complete ASTs.  Scores accumulate the same per-step masked
  // log-probabilities that log_prob computes, so they recompute exactly.
  // Throws when no hypothesis completes within max_steps.
  SampleSet beam_search(const ParamStore& store, const std::vector<std::string>& x,
                        int beam, int max_steps = 200) const;

  // Ancestral sample from q(z | x) with its log-probability.
  ScoredAst sample(const ParamStore& store, const std::vector<std::string>& x,
                   util::Rng& rng, int max_steps = 200) const;

  // Masked per-action log-probabilities at one derivation state (for tests).
  std::vector<double> step_log_probs(const ParamStore& store,
                                     const std::vector<std::string>& x,
                                     const std::vector<transition::Action>& prefix) const;

  // Final hidden state of the utterance encoder — forward state at the last
  // position stacked on backward state at the first (length 2 * hidden_dim).
  // Gradient-free; serves as a fixed-length utterance feature vector.
  Eigen::VectorXd utterance_encoding(const ParamStore& store,
                                     const std::vector<std::string>& x) const;

  // Action-space layout: [ApplyConstr per constructor | Reduce | GenToken per token].
  int action_count() const { return n_ctors_ + 1 + config_.token.size(); }
  int apply_index(int ctor_id) const { return ctor_id; }
  int reduce_index() const { return n_ctors_; }
  int gen_index(int token_id) const { return n_ctors_ + 1 + token_id; }
  int action_index(const transition::Action& a) const;
  transition::Action action_at(int index) const;

  const asdl::AsdlGrammar& grammar() const { return *grammar_; }
  const ModelConfig& config() const { return config_; }

 private:
  struct Decoder;  // incremental gradient-free state, defined in the .cpp

  std::vector<char> legal_mask(const transition::DerivationState& st) const;

  ModelConfig config_;
  const asdl::AsdlGrammar* grammar_;
  int n_ctors_;
  BiLstmEncoder encoder_;
  LstmCell decoder_;
};

}  // namespace sempar::nn
