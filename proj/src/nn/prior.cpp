#include "sempar/nn/prior.hpp"

#include <stdexcept>

namespace sempar::nn {

PriorModel PriorModel::make_recurrent(data::Vocab vocab, int embed_dim,
                                      int hidden_dim, double dropout_rate,
                                      util::Rng& init_rng) {
  PriorModel p;
  p.variant_ = Variant::RecurrentLm;
  p.recurrent_ = std::make_shared<RecurrentLm>(std::move(vocab), embed_dim,
                                               hidden_dim, dropout_rate);
  p.params_ = std::make_shared<ParamStore>();
  p.recurrent_->init(*p.params_, init_rng);
  p.recurrent_->bind(p.params_.get());
  return p;
}

PriorModel PriorModel::make_kn(KnTrigram model) {
  PriorModel p;
  p.variant_ = Variant::KnTrigram;
  p.kn_ = std::make_shared<KnTrigram>(std::move(model));
  return p;
}

const TokenLm& PriorModel::lm() const {
  if (variant_ == Variant::RecurrentLm) return *recurrent_;
  return *kn_;
}

RecurrentLm& PriorModel::recurrent() {
  if (variant_ != Variant::RecurrentLm)
    throw std::logic_error("prior is not the recurrent variant");
  return *recurrent_;
}

const RecurrentLm& PriorModel::recurrent() const {
  if (variant_ != Variant::RecurrentLm)
    throw std::logic_error("prior is not the recurrent variant");
  return *recurrent_;
}

ParamStore& PriorModel::params() {
  if (variant_ != Variant::RecurrentLm)
    throw std::logic_error("the trigram prior has no trainable parameters");
  return *params_;
}

const ParamStore& PriorModel::params() const {
  if (variant_ != Variant::RecurrentLm)
    throw std::logic_error("the trigram prior has no trainable parameters");
  return *params_;
}

const KnTrigram& PriorModel::kn() const {
  if (variant_ != Variant::KnTrigram)
    throw std::logic_error("prior is not the trigram variant");
  return *kn_;
}

double prior_log_prob(const PriorModel& prior, const mr::LinearMR& m) {
  if (m.tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  return prior.log_prob(m);
}

PriorModel fit_kn_trigram(const std::vector<mr::LinearMR>& corpus, double discount) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& m : corpus) sentences.push_back(m.tokens);
  return PriorModel::make_kn(KnTrigram::fit(sentences, discount));
}

}  // namespace sempar::nn
