#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sempar/nn/token_lm.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

// Interpolated Kneser-Ney trigram model.
//
// Sequences are padded with two begin sentinels and one end sentinel.  The
// top level uses raw trigram counts; the bigram level uses continuation
// counts (distinct preceding tokens); the unigram level uses continuation
// counts of the bigram table, interpolated with a uniform distribution over
// the closed vocabulary so every token — including <unk> — has positive
// probability in every context.
class KnTrigram : public TokenLm {
 public:
  static KnTrigram fit(const std::vector<std::vector<std::string>>& corpus,
                       double discount = 0.75);

  double sequence_log_prob(const std::vector<std::string>& tokens) const override;
  std::vector<std::pair<std::string, double>> next_distribution(
      const std::vector<std::string>& prefix) const override;

  // p(w | w1 w2); OOV arguments are mapped to <unk> (contexts and targets).
  double next_prob(const std::string& w1, const std::string& w2,
                   const std::string& w) const;

  // Predicted vocabulary: corpus tokens plus </s> and <unk>, never <s>.
  const std::vector<std::string>& vocab() const { return vocab_; }
  double discount() const { return discount_; }

  void save(std::ostream& out) const;
  static KnTrigram load(std::istream& in);

 private:
  KnTrigram() = default;
  std::string norm(const std::string& w) const;

  double discount_ = 0.75;
  std::vector<std::string> vocab_;
  std::map<std::string, int> vocab_index_;

  using Pair = std::pair<std::string, std::string>;
  std::map<std::pair<Pair, std::string>, long> tri_;  // c(w1 w2 w3)
  std::map<Pair, long> tri_ctx_;                      // Σ_w3 c(w1 w2 w3)
  std::map<Pair, long> tri_types_;                    // |{w3 : c(w1 w2 w3) > 0}|
  std::map<Pair, long> cont_bi_;                      // |{w1 : c(w1 w2 w3) > 0}|
  std::map<std::string, long> cont_bi_ctx_;           // Σ_w3 cont_bi(w2 w3)
  std::map<std::string, long> cont_bi_types_;         // |{w3 : cont_bi(w2 w3) > 0}|
  std::map<std::string, long> cont_uni_;              // |{w2 : cont_bi(w2 w) > 0}|
  long cont_uni_total_ = 0;
  long cont_uni_types_ = 0;

  double p_uni(const std::string& w) const;
  double p_bi(const std::string& w2, const std::string& w) const;
};

}  // namespace sempar::nn
