#pragma once

#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/linear.hpp"

namespace sempar::eval {

struct MetricsReport {
  int total = 0;
  int matches = 0;
  std::vector<char> per_example;  // 1 = match, one entry per scored example

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(matches) / total; }
};

// Rebuilds the AST with the arguments of commutative connectives (any
// constructor named And/Or whose single field is sequential) sorted
// lexicographically by canonical printed form, recursively.
asdl::Ast canonicalize_commutative(const asdl::AsdlGrammar& g, const asdl::Ast& z);

// Structural equality after the kind's canonicalization.  The lambda-calculus
// form sorts And/Or conjuncts unless canonicalize is false; other kinds
// compare the trees directly.
bool exact_match(const asdl::AsdlGrammar& g, const asdl::Ast& pred, const asdl::Ast& gold,
                 mr::MrKind kind, bool canonicalize = true);

}  // namespace sempar::eval
