#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sempar::data {

inline const std::string kUnk = "<unk>";
inline const std::string kBos = "<s>";
inline const std::string kEos = "</s>";

// Immutable token inventory with stable ids.  Ids are assigned in list order;
// build() puts specials first, then tokens by descending count with
// lexicographic tie-break so construction is deterministic.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  static Vocab build(const std::vector<std::vector<std::string>>& sequences,
                     int min_count = 1,
                     const std::vector<std::string>& specials = {kUnk});

  int id(const std::string& tok) const;         // -1 when absent
  int id_or_unk(const std::string& tok) const;  // throws if absent and no <unk>
  bool has(const std::string& tok) const { return id(tok) >= 0; }
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  int unk_id() const { return unk_id_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void save(std::ostream& out) const;
  static Vocab load(std::istream& in);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
  int unk_id_ = -1;
};

}  // namespace sempar::data
