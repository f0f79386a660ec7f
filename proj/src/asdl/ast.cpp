#include "sempar/asdl/ast.hpp"

#include <sstream>

namespace sempar::asdl {

namespace {

bool node_equal(const Ast& a, int ia, const Ast& b, int ib) {
  const AstNode& na = a.node(ia);
  const AstNode& nb = b.node(ib);
  if (na.kind != nb.kind) return false;
  if (na.kind == AstNode::Kind::Primitive) return na.tokens == nb.tokens;
  if (na.constructor_id != nb.constructor_id) return false;
  if (na.children.size() != nb.children.size()) return false;
  for (size_t f = 0; f < na.children.size(); ++f) {
    if (na.children[f].size() != nb.children[f].size()) return false;
    for (size_t k = 0; k < na.children[f].size(); ++k) {
      if (!node_equal(a, na.children[f][k], b, nb.children[f][k])) return false;
    }
  }
  return true;
}

bool check_node(const AsdlGrammar& g, const Ast& ast, int id, const std::string& expected_type,
                std::string* why);

bool check_slot(const AsdlGrammar& g, const Ast& ast, const Constructor& ctor, const Field& field,
                const std::vector<int>& slot, std::string* why) {
  switch (field.cardinality) {
    case Cardinality::Single:
      if (slot.size() != 1) {
        if (why) {
          *why = "field '" + ctor.name + "." + field.name + "' needs exactly one value, has " +
                 std::to_string(slot.size());
        }
        return false;
      }
      break;
    case Cardinality::Optional:
      if (slot.size() > 1) {
        if (why) {
          *why = "optional field '" + ctor.name + "." + field.name + "' has " +
                 std::to_string(slot.size()) + " values";
        }
        return false;
      }
      break;
    case Cardinality::Sequential:
      break;
  }
  for (int child : slot) {
    if (!check_node(g, ast, child, field.type_name, why)) return false;
  }
  return true;
}

bool check_node(const AsdlGrammar& g, const Ast& ast, int id, const std::string& expected_type,
                std::string* why) {
  const AstNode& n = ast.node(id);
  if (g.is_primitive(expected_type)) {
    if (n.kind != AstNode::Kind::Primitive) {
      if (why) *why = "composite node where primitive '" + expected_type + "' expected";
      return false;
    }
    if (!g.is_multitoken(expected_type) && n.tokens.size() != 1) {
      if (why) {
        *why = "primitive '" + expected_type + "' must hold exactly one token, has " +
               std::to_string(n.tokens.size());
      }
      return false;
    }
    return true;
  }
  if (n.kind != AstNode::Kind::Composite) {
    if (why) *why = "primitive node where composite '" + expected_type + "' expected";
    return false;
  }
  if (n.constructor_id < 0 || n.constructor_id >= static_cast<int>(g.constructors().size())) {
    if (why) *why = "node references unknown constructor id";
    return false;
  }
  const Constructor& ctor = g.constructor(n.constructor_id);
  if (ctor.result_type != expected_type) {
    if (why) {
      *why = "constructor '" + ctor.name + "' has type '" + ctor.result_type + "' where '" +
             expected_type + "' expected";
    }
    return false;
  }
  if (n.children.size() != ctor.fields.size()) {
    if (why) *why = "constructor '" + ctor.name + "' child slot count mismatch";
    return false;
  }
  for (size_t f = 0; f < ctor.fields.size(); ++f) {
    if (!check_slot(g, ast, ctor, ctor.fields[f], n.children[f], why)) return false;
  }
  return true;
}

void debug_node(const AsdlGrammar& g, const Ast& ast, int id, std::ostringstream& os) {
  const AstNode& n = ast.node(id);
  if (n.kind == AstNode::Kind::Primitive) {
    os << "'";
    for (size_t i = 0; i < n.tokens.size(); ++i) {
      if (i) os << " ";
      os << n.tokens[i];
    }
    os << "'";
    return;
  }
  const Constructor& ctor = g.constructor(n.constructor_id);
  os << ctor.name;
  if (ctor.fields.empty()) return;
  os << "(";
  for (size_t f = 0; f < ctor.fields.size(); ++f) {
    if (f) os << ", ";
    os << ctor.fields[f].name << "=";
    if (ctor.fields[f].cardinality == Cardinality::Single && n.children[f].size() == 1) {
      debug_node(g, ast, n.children[f][0], os);
    } else {
      os << "[";
      for (size_t k = 0; k < n.children[f].size(); ++k) {
        if (k) os << ", ";
        debug_node(g, ast, n.children[f][k], os);
      }
      os << "]";
    }
  }
  os << ")";
}

}  // namespace

bool ast_equal(const Ast& a, const Ast& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return node_equal(a, a.root, b, b.root);
}

bool conforms(const AsdlGrammar& g, const Ast& ast, std::string* why) {
  if (ast.empty()) {
    if (why) *why = "empty tree";
    return false;
  }
  return check_node(g, ast, ast.root, g.root_type(), why);
}

std::string to_debug_string(const AsdlGrammar& g, const Ast& ast) {
  if (ast.empty()) return "<empty>";
  std::ostringstream os;
  debug_node(g, ast, ast.root, os);
  return os.str();
}

}  // namespace sempar::asdl
