#pragma once

#include <memory>
#include <vector>

#include "sempar/mr/linear.hpp"
#include "sempar/nn/kn_trigram.hpp"
#include "sempar/nn/param_store.hpp"
#include "sempar/nn/token_lm.hpp"

namespace sempar::nn {

// The distribution over linearized MRs: either a recurrent LM with trainable
// parameters or a count-based Kneser-Ney trigram.
class PriorModel {
 public:
  enum class Variant { RecurrentLm, KnTrigram };

  static PriorModel make_recurrent(data::Vocab vocab, int embed_dim, int hidden_dim,
                                   double dropout_rate, util::Rng& init_rng);
  static PriorModel make_kn(KnTrigram model);

  Variant variant() const { return variant_; }

  double log_prob(const mr::LinearMR& m) const { return lm().sequence_log_prob(m.tokens); }
  const TokenLm& lm() const;

  // RecurrentLm-only accessors (throw for the trigram variant).
  RecurrentLm& recurrent();
  const RecurrentLm& recurrent() const;
  ParamStore& params();
  const ParamStore& params() const;

  // KnTrigram-only accessor.
  const KnTrigram& kn() const;

  std::vector<std::string> sample_tokens(util::Rng& rng, int max_len) const {
    return lm().sample(rng, max_len);
  }

 private:
  Variant variant_ = Variant::KnTrigram;
  std::shared_ptr<RecurrentLm> recurrent_;
  std::shared_ptr<ParamStore> params_;
  std::shared_ptr<KnTrigram> kn_;
};

double prior_log_prob(const PriorModel& prior, const mr::LinearMR& m);

PriorModel fit_kn_trigram(const std::vector<mr::LinearMR>& corpus, double discount);

}  // namespace sempar::nn
