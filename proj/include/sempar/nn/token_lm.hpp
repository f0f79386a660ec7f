#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sempar/data/vocab.hpp"
#include "sempar/nn/lstm.hpp"
#include "sempar/nn/param_store.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

// Autoregressive distribution over token sequences.  Scores include the
// end-of-sequence step; conditioning starts from a begin sentinel.
class TokenLm {
 public:
  virtual ~TokenLm() = default;

  // log p(tokens), natural log, including the end-of-sequence factor.
  virtual double sequence_log_prob(const std::vector<std::string>& tokens) const = 0;

  // Next-token distribution given a prefix, over the closed vocabulary
  // (which includes </s>).  Sums to 1 within 1e-9.
  virtual std::vector<std::pair<std::string, double>> next_distribution(
      const std::vector<std::string>& prefix) const = 0;

  virtual std::vector<std::string> sample(util::Rng& rng, int max_len) const;
};

// LSTM language model: h_i advances on the embedding of the previous token,
// and the next-token distribution is softmax(W h_i + b).
class RecurrentLm : public TokenLm {
 public:
  // vocab must contain <unk> and </s>; <s> is handled as a dedicated start
  // embedding and is never predicted.
  RecurrentLm(data::Vocab vocab, int embed_dim, int hidden_dim,
              double dropout_rate = 0.0);

  void init(ParamStore& store, util::Rng& rng) const;

  // Shares the TokenLm interface by binding a store first.
  void bind(const ParamStore* store) { store_ = store; }
  const ParamStore* bound() const { return store_; }

  double sequence_log_prob(const std::vector<std::string>& tokens) const override;
  std::vector<std::pair<std::string, double>> next_distribution(
      const std::vector<std::string>& prefix) const override;

  // Differentiable scoring for training; identical math to the plain pass.
  Var sequence_log_prob_var(Tape& t, ParamStore& store,
                            const std::vector<std::string>& tokens,
                            util::Rng* dropout_rng = nullptr,
                            bool train = false) const;

  const data::Vocab& vocab() const { return vocab_; }
  int hidden_dim() const { return cell_.hidden_dim(); }

 private:
  data::Vocab vocab_;
  int embed_dim_;
  double dropout_rate_;
  LstmCell cell_;
  const ParamStore* store_ = nullptr;
};

// Degenerate distribution that puts all mass on one fixed sequence; useful
// for pinning arithmetic in tests and diagnostics.
class PointMassLm : public TokenLm {
 public:
  explicit PointMassLm(std::vector<std::string> target) : target_(std::move(target)) {}

  double sequence_log_prob(const std::vector<std::string>& tokens) const override;
  std::vector<std::pair<std::string, double>> next_distribution(
      const std::vector<std::string>& prefix) const override;

 private:
  std::vector<std::string> target_;
};

}  // namespace sempar::nn
