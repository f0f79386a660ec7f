#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/grammar.hpp"

namespace sempar::transition {

// reserved terminator that closes a multitoken primitive value
inline const std::string kFieldTerminator = "</f>";

struct Action {
  enum class Kind { Apply, Reduce, GenToken };
  Kind kind = Kind::Reduce;
  int ctor = -1;       // Apply
  std::string token;   // GenToken

  static Action apply(int ctor_id) { return {Kind::Apply, ctor_id, {}}; }
  static Action reduce() { return {Kind::Reduce, -1, {}}; }
  static Action gen(std::string tok) { return {Kind::GenToken, -1, std::move(tok)}; }

  bool operator==(const Action&) const = default;
};

std::string to_string(const asdl::AsdlGrammar& g, const Action& a);

// line-oriented text form: "APPLY Call" / "REDUCE" / "GEN my_list" (tokens escaped)
std::string serialize_actions(const asdl::AsdlGrammar& g, const std::vector<Action>& actions);
std::vector<Action> parse_actions(const asdl::AsdlGrammar& g, const std::string& text);

}  // namespace sempar::transition
