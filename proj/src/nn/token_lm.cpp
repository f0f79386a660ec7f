#include "sempar/nn/token_lm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sempar/nn/plain.hpp"

namespace sempar::nn {

std::vector<std::string> TokenLm::sample(util::Rng& rng, int max_len) const {
  std::vector<std::string> out;
  for (int i = 0; i < max_len; ++i) {
    auto dist = next_distribution(out);
    std::vector<double> weights(dist.size());
    for (std::size_t k = 0; k < dist.size(); ++k) weights[k] = dist[k].second;
    const std::string& tok = dist[rng.categorical(weights)].first;
    if (tok == data::kEos) return out;
    out.push_back(tok);
  }
  return out;  // truncated at max_len without </s>
}

RecurrentLm::RecurrentLm(data::Vocab vocab, int embed_dim, int hidden_dim,
                         double dropout_rate)
    : vocab_(std::move(vocab)),
      embed_dim_(embed_dim),
      dropout_rate_(dropout_rate),
      cell_("lm.cell", embed_dim, hidden_dim) {
  if (vocab_.unk_id() < 0) throw std::logic_error("LM vocabulary needs <unk>");
  if (!vocab_.has(data::kEos)) throw std::logic_error("LM vocabulary needs </s>");
}

void RecurrentLm::init(ParamStore& store, util::Rng& rng) const {
  double se = 0.08;
  store.add("lm.embed", embed_dim_, vocab_.size(), se, rng);
  store.add("lm.start", embed_dim_, 1, se, rng);
  cell_.init(store, rng);
  store.add("lm.Wout", vocab_.size(), cell_.hidden_dim(),
            std::sqrt(6.0 / (vocab_.size() + cell_.hidden_dim())), rng);
  store.add_zeros("lm.bout", vocab_.size(), 1);
}

double RecurrentLm::sequence_log_prob(const std::vector<std::string>& tokens) const {
  if (!store_) throw std::logic_error("RecurrentLm: no parameter store bound");
  if (tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  const ParamStore& store = *store_;
  const Mat& embed = store.value("lm.embed");
  plain::LstmState s = plain::lstm_start(cell_.hidden_dim());
  Mat prev = store.value("lm.start");
  double total = 0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    s = plain::lstm_step(store, cell_.prefix(), prev, s);
    Mat logits = store.value("lm.Wout") * s.h + store.value("lm.bout");
    double hi = logits.maxCoeff();
    double lse = hi + std::log((logits.array() - hi).exp().sum());
    int next = i < tokens.size() ? vocab_.id_or_unk(tokens[i]) : vocab_.id(data::kEos);
    total += logits(next, 0) - lse;
    if (i < tokens.size()) prev = embed.col(next);
  }
  return total;
}

std::vector<std::pair<std::string, double>> RecurrentLm::next_distribution(
    const std::vector<std::string>& prefix) const {
  if (!store_) throw std::logic_error("RecurrentLm: no parameter store bound");
  const ParamStore& store = *store_;
  const Mat& embed = store.value("lm.embed");
  plain::LstmState s = plain::lstm_start(cell_.hidden_dim());
  Mat prev = store.value("lm.start");
  for (const auto& tok : prefix) {
    s = plain::lstm_step(store, cell_.prefix(), prev, s);
    prev = embed.col(vocab_.id_or_unk(tok));
  }
  s = plain::lstm_step(store, cell_.prefix(), prev, s);
  Mat p = plain::softmax(store.value("lm.Wout") * s.h + store.value("lm.bout"));
  std::vector<std::pair<std::string, double>> out;
  out.reserve(static_cast<std::size_t>(vocab_.size()));
  for (int k = 0; k < vocab_.size(); ++k) out.push_back({vocab_.token(k), p(k, 0)});
  return out;
}

Var RecurrentLm::sequence_log_prob_var(Tape& t, ParamStore& store,
                                       const std::vector<std::string>& tokens,
                                       util::Rng* dropout_rng, bool train) const {
  if (tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  Var embed = store.leaf(t, "lm.embed");
  Var wout = store.leaf(t, "lm.Wout");
  Var bout = store.leaf(t, "lm.bout");
  LstmCell::State s = cell_.start(t);
  Var prev = store.leaf(t, "lm.start");
  std::vector<Var> terms;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    s = cell_.step(t, store, prev, s);
    if (train && dropout_rng)
      s.h = dropout(s.h, dropout_rate_, *dropout_rng, true);
    Var logp = log_softmax(add(matmul(wout, s.h), bout));
    int next = i < tokens.size() ? vocab_.id_or_unk(tokens[i]) : vocab_.id(data::kEos);
    terms.push_back(pick(logp, next));
    if (i < tokens.size()) prev = col(embed, next);
  }
  return vsum(concat(terms));
}

double PointMassLm::sequence_log_prob(const std::vector<std::string>& tokens) const {
  return tokens == target_ ? 0.0 : -std::numeric_limits<double>::infinity();
}

std::vector<std::pair<std::string, double>> PointMassLm::next_distribution(
    const std::vector<std::string>& prefix) const {
  if (prefix.size() < target_.size() &&
      std::equal(prefix.begin(), prefix.end(), target_.begin()))
    return {{target_[prefix.size()], 1.0}};
  if (prefix == target_) return {{data::kEos, 1.0}};
  return {{data::kEos, 1.0}};  // off-support prefixes terminate immediately
}

}  // namespace sempar::nn
