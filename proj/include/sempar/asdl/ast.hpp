#pragma once

#include <string>
#include <vector>

#include "sempar/asdl/grammar.hpp"

namespace sempar::asdl {

// Index-based tree storage: cheap value copies, structural equality.
struct AstNode {
  enum class Kind { Composite, Primitive };
  Kind kind = Kind::Composite;

  // Composite
  int constructor_id = -1;
  std::vector<std::vector<int>> children;  // one slot per field, 0/1/many node ids

  // Primitive (single token unless the field's type is multitoken)
  std::vector<std::string> tokens;
};

struct Ast {
  std::vector<AstNode> nodes;
  int root = -1;

  const AstNode& node(int id) const { return nodes[id]; }
  AstNode& node(int id) { return nodes[id]; }

  int add_composite(int constructor_id, size_t field_count) {
    AstNode n;
    n.kind = AstNode::Kind::Composite;
    n.constructor_id = constructor_id;
    n.children.resize(field_count);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  int add_primitive(std::vector<std::string> tokens) {
    AstNode n;
    n.kind = AstNode::Kind::Primitive;
    n.tokens = std::move(tokens);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  bool empty() const { return root < 0; }
};

// structural equality from the roots (node ids may differ)
bool ast_equal(const Ast& a, const Ast& b);

// every Composite conforms to its constructor's field types/cardinalities;
// single-token rule for non-multitoken primitives
bool conforms(const AsdlGrammar& g, const Ast& ast, std::string* why = nullptr);

// diagnostic one-line rendering: Ctor(field=..., ...) with primitive tokens quoted
std::string to_debug_string(const AsdlGrammar& g, const Ast& ast);

}  // namespace sempar::asdl
