#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/error.hpp"

namespace sempar::mr {

// whitespace + parentheses split; "(" and ")" are their own tokens,
// atoms like $0, ci0, lunch:me stay whole
std::vector<std::string> lf_tokenize(const std::string& text);

// s-expression -> AST under the lambda-calculus grammar
asdl::Ast lf_parse(const asdl::AsdlGrammar& g, const std::string& text);

// canonical single-space rendering; lf_parse(lf_print(z)) == z
std::string lf_print(const asdl::AsdlGrammar& g, const asdl::Ast& z);

}  // namespace sempar::mr
