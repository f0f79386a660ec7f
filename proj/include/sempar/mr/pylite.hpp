#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/error.hpp"

namespace sempar::mr {

// One logical line of restricted Python: Expr / Assign / Return and
// single-line If / Elif / For headers closed with ": pass".  Expressions
// cover calls, attribute and subscript chains, names, tuples, +-*/ operators,
// single-quoted strings (no escapes) and nonnegative number literals.

// Strings come out as one token including their quotes.
std::vector<std::string> pylite_tokenize(const std::string& code);

asdl::Ast pylite_parse(const asdl::AsdlGrammar& g, const std::string& code);

// deterministic, minimally parenthesized; pylite_parse(pylite_print(z)) == z
std::string pylite_print(const asdl::AsdlGrammar& g, const asdl::Ast& z);

}  // namespace sempar::mr
