#include "sempar/nn/kn_trigram.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "sempar/util/text.hpp"

namespace sempar::nn {

KnTrigram KnTrigram::fit(const std::vector<std::vector<std::string>>& corpus,
                         double discount) {
  if (corpus.empty()) throw std::invalid_argument("cannot fit a language model on an empty corpus");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("discount must lie strictly between 0 and 1");
  KnTrigram m;
  m.discount_ = discount;

  std::set<std::string> types;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) {
      if (tok == data::kBos) throw std::invalid_argument("corpus contains the reserved begin sentinel");
      types.insert(tok);
    }
  types.insert(data::kEos);
  types.insert(data::kUnk);
  m.vocab_.assign(types.begin(), types.end());
  for (std::size_t i = 0; i < m.vocab_.size(); ++i)
    m.vocab_index_[m.vocab_[i]] = static_cast<int>(i);

  std::map<Pair, std::set<std::string>> bi_preceders;
  for (const auto& sent : corpus) {
    std::vector<std::string> padded;
    padded.reserve(sent.size() + 3);
    padded.push_back(data::kBos);
    padded.push_back(data::kBos);
    for (const auto& tok : sent) padded.push_back(tok);
    padded.push_back(data::kEos);
    for (std::size_t i = 2; i < padded.size(); ++i) {
      const std::string& w1 = padded[i - 2];
      const std::string& w2 = padded[i - 1];
      const std::string& w3 = padded[i];
      Pair ctx{w1, w2};
      long& c = m.tri_[{ctx, w3}];
      if (c == 0) ++m.tri_types_[ctx];
      ++c;
      ++m.tri_ctx_[ctx];
      bi_preceders[{w2, w3}].insert(w1);
    }
  }

  std::map<std::string, std::set<std::string>> uni_preceders;
  for (const auto& [bigram, preceders] : bi_preceders) {
    long n = static_cast<long>(preceders.size());
    m.cont_bi_[bigram] = n;
    m.cont_bi_ctx_[bigram.first] += n;
    ++m.cont_bi_types_[bigram.first];
    uni_preceders[bigram.second].insert(bigram.first);
  }
  for (const auto& [tok, preceders] : uni_preceders) {
    long n = static_cast<long>(preceders.size());
    m.cont_uni_[tok] = n;
    m.cont_uni_total_ += n;
    ++m.cont_uni_types_;
  }
  return m;
}

std::string KnTrigram::norm(const std::string& w) const {
  if (w == data::kBos) return w;  // legal in contexts only
  return vocab_index_.count(w) ? w : data::kUnk;
}

double KnTrigram::p_uni(const std::string& w) const {
  auto it = cont_uni_.find(w);
  long c = it == cont_uni_.end() ? 0 : it->second;
  double n = static_cast<double>(cont_uni_total_);
  double seen = std::max(static_cast<double>(c) - discount_, 0.0) / n;
  double smooth = discount_ * static_cast<double>(cont_uni_types_) / n /
                  static_cast<double>(vocab_.size());
  return seen + smooth;
}

double KnTrigram::p_bi(const std::string& w2, const std::string& w) const {
  auto ctx = cont_bi_ctx_.find(w2);
  if (ctx == cont_bi_ctx_.end() || ctx->second == 0) return p_uni(w);
  double total = static_cast<double>(ctx->second);
  auto it = cont_bi_.find({w2, w});
  double c = it == cont_bi_.end() ? 0.0 : static_cast<double>(it->second);
  double types = static_cast<double>(cont_bi_types_.at(w2));
  return std::max(c - discount_, 0.0) / total +
         discount_ * types / total * p_uni(w);
}

double KnTrigram::next_prob(const std::string& w1_raw, const std::string& w2_raw,
                            const std::string& w_raw) const {
  std::string w1 = norm(w1_raw), w2 = norm(w2_raw), w = norm(w_raw);
  if (w == data::kBos) return 0.0;  // the begin sentinel is never predicted
  Pair ctx{w1, w2};
  auto t = tri_ctx_.find(ctx);
  if (t == tri_ctx_.end() || t->second == 0) return p_bi(w2, w);
  double total = static_cast<double>(t->second);
  auto it = tri_.find({ctx, w});
  double c = it == tri_.end() ? 0.0 : static_cast<double>(it->second);
  double types = static_cast<double>(tri_types_.at(ctx));
  return std::max(c - discount_, 0.0) / total +
         discount_ * types / total * p_bi(w2, w);
}

double KnTrigram::sequence_log_prob(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  std::string w1 = data::kBos, w2 = data::kBos;
  double total = 0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    const std::string& w = i < tokens.size() ? tokens[i] : data::kEos;
    total += std::log(next_prob(w1, w2, w));
    w1 = w2;
    w2 = norm(w);
  }
  return total;
}

std::vector<std::pair<std::string, double>> KnTrigram::next_distribution(
    const std::vector<std::string>& prefix) const {
  std::string w1 = data::kBos, w2 = data::kBos;
  if (prefix.size() >= 2) {
    w1 = norm(prefix[prefix.size() - 2]);
    w2 = norm(prefix[prefix.size() - 1]);
  } else if (prefix.size() == 1) {
    w2 = norm(prefix[0]);
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(vocab_.size());
  for (const auto& w : vocab_) out.push_back({w, next_prob(w1, w2, w)});
  return out;
}

void KnTrigram::save(std::ostream& out) const {
  out << "kn_trigram 1\n";
  out << "discount " << util::fmt_double(discount_) << "\n";
  out << "vocab " << vocab_.size() << "\n";
  for (const auto& w : vocab_) out << util::escape_token(w) << "\n";
  out << "trigrams " << tri_.size() << "\n";
  for (const auto& [key, c] : tri_)
    out << util::escape_token(key.first.first) << " "
        << util::escape_token(key.first.second) << " "
        << util::escape_token(key.second) << " " << c << "\n";
}

KnTrigram KnTrigram::load(std::istream& in) {
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "kn_trigram" || version != 1)
    throw std::runtime_error("trigram block: bad header");
  double discount = 0;
  if (!(in >> word >> discount) || word != "discount")
    throw std::runtime_error("trigram block: bad discount line");
  std::size_t vocab_n = 0;
  if (!(in >> word >> vocab_n) || word != "vocab")
    throw std::runtime_error("trigram block: bad vocab header");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < vocab_n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("trigram block: truncated vocab");
    vocab.push_back(util::unescape_token(line));
  }
  std::size_t tri_n = 0;
  if (!(in >> word >> tri_n) || word != "trigrams")
    throw std::runtime_error("trigram block: bad trigram header");
  // Rebuild the full count hierarchy from raw trigrams by replaying them as
  // a weighted corpus; simplest is to re-accumulate the same way fit() does.
  KnTrigram m;
  m.discount_ = discount;
  m.vocab_ = vocab;
  for (std::size_t i = 0; i < m.vocab_.size(); ++i)
    m.vocab_index_[m.vocab_[i]] = static_cast<int>(i);
  std::map<Pair, std::set<std::string>> bi_preceders;
  for (std::size_t k = 0; k < tri_n; ++k) {
    std::string w1e, w2e, w3e;
    long c = 0;
    if (!(in >> w1e >> w2e >> w3e >> c))
      throw std::runtime_error("trigram block: truncated trigram rows");
    std::string w1 = util::unescape_token(w1e);
    std::string w2 = util::unescape_token(w2e);
    std::string w3 = util::unescape_token(w3e);
    Pair ctx{w1, w2};
    long& cell = m.tri_[{ctx, w3}];
    if (cell == 0) ++m.tri_types_[ctx];
    cell += c;
    m.tri_ctx_[ctx] += c;
    bi_preceders[{w2, w3}].insert(w1);
  }
  std::map<std::string, std::set<std::string>> uni_preceders;
  for (const auto& [bigram, preceders] : bi_preceders) {
    long n = static_cast<long>(preceders.size());
    m.cont_bi_[bigram] = n;
    m.cont_bi_ctx_[bigram.first] += n;
    ++m.cont_bi_types_[bigram.first];
    uni_preceders[bigram.second].insert(bigram.first);
  }
  for (const auto& [tok, preceders] : uni_preceders) {
    long n = static_cast<long>(preceders.size());
    m.cont_uni_[tok] = n;
    m.cont_uni_total_ += n;
    ++m.cont_uni_types_;
  }
  return m;
}

}  // namespace sempar::nn
