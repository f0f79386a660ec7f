#include "sempar/eval/metrics.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace sempar::eval {

namespace {

bool is_commutative(const asdl::AsdlGrammar& g, int ctor_id) {
  const asdl::Constructor& c = g.constructor(ctor_id);
  return (c.name == "And" || c.name == "Or") && c.fields.size() == 1 &&
         c.fields[0].cardinality == asdl::Cardinality::Sequential;
}

// Copies the subtree at src_id into out, sorting commutative arguments.
int rebuild(const asdl::AsdlGrammar& g, const asdl::Ast& src, int src_id, asdl::Ast& out) {
  const asdl::AstNode& n = src.node(src_id);
  if (n.kind == asdl::AstNode::Kind::Primitive) return out.add_primitive(n.tokens);

  std::vector<std::vector<int>> children(n.children.size());
  for (std::size_t f = 0; f < n.children.size(); ++f) {
    for (int child : n.children[f]) children[f].push_back(rebuild(g, src, child, out));
  }
  if (is_commutative(g, n.constructor_id) && children.size() == 1 && children[0].size() > 1) {
    // Key each argument by its rendered form; the renderer only follows nodes
    // reachable from the chosen root, so a shallow copy with a moved root
    // renders exactly that argument.  The debug rendering is total and
    // injective over subtree structure, which is all a sort key needs.
    std::vector<std::pair<std::string, int>> keyed;
    keyed.reserve(children[0].size());
    for (int child : children[0]) {
      asdl::Ast view = out;
      view.root = child;
      keyed.emplace_back(asdl::to_debug_string(g, view), child);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < keyed.size(); ++i) children[0][i] = keyed[i].second;
  }
  int id = out.add_composite(n.constructor_id, children.size());
  out.node(id).children = std::move(children);
  return id;
}

}  // namespace

asdl::Ast canonicalize_commutative(const asdl::AsdlGrammar& g, const asdl::Ast& z) {
  if (z.empty()) return z;
  asdl::Ast out;
  out.root = rebuild(g, z, z.root, out);
  return out;
}

bool exact_match(const asdl::AsdlGrammar& g, const asdl::Ast& pred, const asdl::Ast& gold,
                 mr::MrKind kind, bool canonicalize) {
  if (kind == mr::MrKind::Lambda && canonicalize) {
    return asdl::ast_equal(canonicalize_commutative(g, pred), canonicalize_commutative(g, gold));
  }
  return asdl::ast_equal(pred, gold);
}

}  // namespace sempar::eval
