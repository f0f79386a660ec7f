#pragma once

#include <string>
#include <vector>

#include "sempar/mr/linear.hpp"
#include "sempar/nn/lstm.hpp"
#include "sempar/nn/model_config.hpp"
#include "sempar/nn/param_store.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

// Attentional encoder-decoder that scores an utterance x given a linearized
// MR.  Each output step marginalizes a closed-vocabulary generation channel
// and a pointer-network copy channel over MR positions:
//   p(x_i | .) = p(gen|.) p(x_i|gen,.) + p(copy|.) p(x_i|copy,.)
// A token occurring at several MR positions receives the SUM of the pointer
// probabilities of those positions.
class ReconstructionModel {
 public:
  explicit ReconstructionModel(const ModelConfig& config);

  void init(ParamStore& store, util::Rng& rng) const;

  struct StepTrace {
    std::string token;     // surface token scored at this step (</s> for the last)
    double p_gen = 0;      // gate masses
    double p_copy = 0;
    double p_token_gen = 0;   // channel-conditional token probabilities
    double p_token_copy = 0;
    bool oov_unk_gen = false;  // OOV token absent from the MR, scored as UNK-generate
  };
  struct Result {
    double log_prob = 0;
    std::vector<StepTrace> steps;
  };

  // Gradient-free scoring.
  Result log_prob(const ParamStore& store, const std::vector<std::string>& x,
                  const mr::LinearMR& m) const;

  // Differentiable scoring; same math as log_prob.
  Var log_prob_var(Tape& t, ParamStore& store, const std::vector<std::string>& x,
                   const mr::LinearMR& m, util::Rng* dropout_rng = nullptr,
                   bool train = false) const;

  // Marginal distribution over the next surface token given a prefix of x:
  // every vocabulary token plus every OOV MR token, probabilities summing to 1.
  std::vector<std::pair<std::string, double>> next_distribution(
      const ParamStore& store, const std::vector<std::string>& x_prefix,
      const mr::LinearMR& m) const;

  std::vector<std::string> sample_x(const ParamStore& store, const mr::LinearMR& m,
                                    util::Rng& rng, int max_len) const;

  // p(gen|.)p(tok|gen,.) + p(copy|.)p(tok|copy,.)
  static double combine_step_prob(double p_gen, double p_token_gen, double p_copy,
                                  double p_token_copy) {
    return p_gen * p_token_gen + p_copy * p_token_copy;
  }

  const ModelConfig& config() const { return config_; }

 private:
  struct Decoder;  // incremental gradient-free state, defined in the .cpp

  ModelConfig config_;
  BiLstmEncoder encoder_;
  LstmCell decoder_;
};

}  // namespace sempar::nn
