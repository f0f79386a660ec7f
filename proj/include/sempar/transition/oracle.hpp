#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/transition/derivation.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::transition {

// Supplies candidate tokens for a primitive type during rollouts/enumeration.
using TokenCandidates = std::function<std::vector<std::string>(const std::string& type_name)>;

// Fixed per-type token pools as a TokenCandidates.
TokenCandidates token_pool(std::map<std::string, std::vector<std::string>> pools);

// Canonical action sequence that rebuilds `ast` exactly.  Throws
// std::runtime_error if the AST does not conform to the grammar.
std::vector<Action> ast_to_actions(const asdl::AsdlGrammar& g, const asdl::Ast& ast);

// Replays actions from the initial state.  Throws IllegalActionError on an
// illegal step and std::runtime_error if the sequence ends incomplete.
asdl::Ast actions_to_ast(const asdl::AsdlGrammar& g, const std::vector<Action>& actions);

// Minimum number of expansion levels needed to complete a value of each
// composite type (primitives cost zero).  Types that can never terminate map
// to a negative value; rollouts reject such grammars up front.
std::map<std::string, int> min_completion_depth(const asdl::AsdlGrammar& g);

struct RolloutOptions {
  int depth_cap = 20;      // beyond this stack depth, steer toward completion
  int step_cap = 300;      // beyond this many actions, steer toward completion
  int multitoken_cap = 3;  // max tokens drawn into one multitoken value
};

// Uniform random walk over actions the grammar mask allows.  Always
// terminates in a complete, conforming AST: past either cap the walk closes
// closable fields and picks cheapest constructors, which strictly shrinks
// the remaining work.
asdl::Ast random_rollout(const asdl::AsdlGrammar& g, util::Rng& rng,
                         const TokenCandidates& tokens, const RolloutOptions& opt = {});

// All complete ASTs reachable with the given token pools, DFS order.
// Throws std::runtime_error if more than `limit` are found.
std::vector<asdl::Ast> enumerate_asts(const asdl::AsdlGrammar& g, const TokenCandidates& tokens,
                                      std::size_t limit);

}  // namespace sempar::transition
