#include "sempar/data/vocab.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "sempar/util/text.hpp"

namespace sempar::data {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw std::logic_error("duplicate vocabulary token: " + tokens_[i]);
  }
  auto it = index_.find(kUnk);
  unk_id_ = it == index_.end() ? -1 : it->second;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sequences,
                   int min_count, const std::vector<std::string>& specials) {
  std::map<std::string, int> counts;
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++counts[tok];
  std::vector<std::string> toks = specials;
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& [tok, n] : counts) {
    if (n < min_count) continue;
    if (std::find(specials.begin(), specials.end(), tok) != specials.end()) continue;
    ranked.push_back({-n, tok});
  }
  std::sort(ranked.begin(), ranked.end());
  for (const auto& [neg, tok] : ranked) toks.push_back(tok);
  return Vocab(std::move(toks));
}

int Vocab::id(const std::string& tok) const {
  auto it = index_.find(tok);
  return it == index_.end() ? -1 : it->second;
}

int Vocab::id_or_unk(const std::string& tok) const {
  int i = id(tok);
  if (i >= 0) return i;
  if (unk_id_ < 0) throw std::logic_error("token absent and vocabulary has no <unk>: " + tok);
  return unk_id_;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw std::logic_error("vocabulary id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(std::ostream& out) const {
  out << "vocab " << tokens_.size() << "\n";
  for (const auto& tok : tokens_) out << util::escape_token(tok) << "\n";
}

Vocab Vocab::load(std::istream& in) {
  std::string word;
  std::size_t n = 0;
  if (!(in >> word >> n) || word != "vocab")
    throw std::runtime_error("vocabulary block: expected 'vocab <count>' header");
  std::string line;
  std::getline(in, line);  // finish header line
  std::vector<std::string> toks;
  toks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("vocabulary block: truncated at entry " + std::to_string(i));
    toks.push_back(util::unescape_token(line));
  }
  return Vocab(std::move(toks));
}

}  // namespace sempar::data
