#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/linear.hpp"
#include "sempar/nn/inference.hpp"
#include "sempar/nn/prior.hpp"
#include "sempar/nn/reconstruction.hpp"
#include "sempar/train/baseline.hpp"
#include "sempar/train/config.hpp"
#include "sempar/train/signal.hpp"
#include "sempar/transition/action.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::train {

// A labeled example with the derived views every training step needs.
struct TrainExample {
  std::vector<std::string> x;               // utterance tokens
  asdl::Ast z;                              // gold tree
  std::vector<transition::Action> actions;  // oracle action sequence for z
  mr::LinearMR mr;                          // linearized z
};

// Derives actions and the linearization; throws if z does not conform.
TrainExample make_train_example(const asdl::AsdlGrammar& g, mr::MrKind kind,
                                std::vector<std::string> x, asdl::Ast z);

// The trainable pair: inference q(z|x) and reconstruction p(x|z) with their
// parameter stores and the task's surface form.
struct ParserModels {
  nn::ModelConfig config;
  mr::MrKind kind;
  nn::InferenceModel inference;
  nn::ReconstructionModel reconstruction;
  nn::ParamStore inf_store;
  nn::ParamStore rec_store;

  ParserModels(const nn::ModelConfig& cfg, const asdl::AsdlGrammar& g, mr::MrKind kind,
               util::Rng& init_rng);

  const asdl::AsdlGrammar& grammar() const { return inference.grammar(); }
};

// Accumulates gradients of loss = -sum over the batch of
// (log q(z|x) + log p(x|z)) into both stores; returns the loss value.
// The caller zeroes gradients before and applies the optimizer after.
double supervised_step(ParserModels& m, const std::vector<const TrainExample*>& batch);

// How S(x) is drawn in unsupervised steps.
enum class SampleMode {
  Beam,          // deterministic top-K (the training default)
  Ancestral,     // independent draws from q(z|x) (unbiasedness tests)
  ExactSupport,  // full enumeration with exact q-weights (identity tests)
};

struct UnsupOutcome {
  double objective = 0;  // weighted estimate of the unsupervised objective
  int skipped = 0;       // utterances that yielded no usable sample
  int dropped_samples = 0;  // individual samples dropped (non-finite scores)
  std::vector<std::vector<LearningSignalRecord>> records;   // per kept utterance
  std::vector<nn::SampleSet> samples;                       // aligned with records
  std::vector<const std::vector<std::string>*> utterances;  // aligned with records
};

// One score-function step over a batch of unlabeled utterances:
//   phi gradient:   sum_x weight * sum_i w_i * l_i * d log q(z_i|x) / d phi
//   theta gradient: sum_x weight * sum_i w_i *       d log p(x|z_i) / d theta
// with w_i = 1/|S(x)| for Beam/Ancestral and the exact posterior weight
// q(z_i|x) for ExactSupport.  Signals use the baseline value *before* the
// baseline is refit on this batch's raw signals.  Gradients accumulate into
// the stores (of -weight * J_u, so minimizing moves J_u up); rng is consumed
// only in Ancestral mode.
UnsupOutcome unsupervised_step(ParserModels& m,
                               const std::vector<const std::vector<std::string>*>& batch,
                               const nn::PriorModel& prior, Baseline& baseline,
                               const TrainerConfig& cfg, double weight, SampleMode mode,
                               util::Rng& rng);

// All complete derivations for x via an exhaustive beam.  Throws
// std::runtime_error when the enumerated probability mass is not 1 within
// 1e-9 (support wider than max_support).
nn::SampleSet enumerate_support(const ParserModels& m, const std::vector<std::string>& x,
                                int max_support);

// Lower-bound arithmetic shared by the estimators and tests:
//   sum_i weight_i * (log_rec_i - lambda * (log_q_i - log_prior_i)).
struct ElboComponent {
  double weight = 0;  // 1/n for Monte-Carlo, q(z|x) for exact enumeration
  double log_q = 0;
  double log_rec = 0;
  double log_prior = 0;
};
double elbo_from_components(const std::vector<ElboComponent>& items, double lambda);

// Monte-Carlo estimate with n ancestral samples from q(z|x).
double elbo_estimate(const ParserModels& m, const std::vector<std::string>& x,
                     const nn::PriorModel& prior, double lambda, int n_samples, util::Rng& rng);

// Exact expectation over the enumerated support.
double elbo_exact(const ParserModels& m, const std::vector<std::string>& x,
                  const nn::PriorModel& prior, double lambda, int max_support = 256);

// log p(x) = logsumexp over the enumerated support of log p(z) + log p(x|z).
double marginal_log_likelihood(const ParserModels& m, const std::vector<std::string>& x,
                               const nn::PriorModel& prior, int max_support = 256);

}  // namespace sempar::train
