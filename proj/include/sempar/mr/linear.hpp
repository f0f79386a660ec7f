#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/error.hpp"

namespace sempar::mr {

// Which surface form a linearized MR uses.  Lambda and PyLite map to their
// concrete syntaxes; Generic is a grammar-driven s-expression usable with any
// grammar (the toy task uses it).
enum class MrKind { Lambda, PyLite, Generic };

const char* to_string(MrKind k);
MrKind mr_kind_from_string(const std::string& s);

// The token sequence fed to sequence models (prior + reconstruction input).
struct LinearMR {
  std::vector<std::string> tokens;
  MrKind kind = MrKind::Generic;

  bool operator==(const LinearMR&) const = default;
};

LinearMR linearize(const asdl::AsdlGrammar& g, const asdl::Ast& z, MrKind kind);

// inverse of linearize; throws MrSyntaxError when the tokens are not a
// well-formed, conforming surface form
asdl::Ast delinearize(const asdl::AsdlGrammar& g, const LinearMR& m);

// true iff delinearize succeeds
bool syntax_check(const asdl::AsdlGrammar& g, const LinearMR& m);

// display form (single-space join)
std::string surface(const LinearMR& m);

}  // namespace sempar::mr
