#include "sempar/mr/linear.hpp"

#include <set>

#include "sempar/mr/lambda_form.hpp"
#include "sempar/mr/pylite.hpp"
#include "sempar/util/text.hpp"

namespace sempar::mr {

namespace {

// Grammar-driven s-expression: composite = "(" Ctor field... ")", where a
// Single field is one value, Optional/Sequential fields are bracketed groups,
// and multitoken primitives are braced token runs.  The six structural tokens
// are reserved and rejected as primitive values.
const std::set<std::string> kStructural = {"(", ")", "[", "]", "{", "}"};

void generic_print(const asdl::AsdlGrammar& g, const asdl::Ast& ast, const std::string& type_name,
                   int id, std::vector<std::string>& out) {
  const asdl::AstNode& n = ast.node(id);
  if (g.is_primitive(type_name)) {
    if (g.is_multitoken(type_name)) {
      out.push_back("{");
      for (const std::string& t : n.tokens) out.push_back(t);
      out.push_back("}");
    } else {
      out.push_back(n.tokens.at(0));
    }
    return;
  }
  const asdl::Constructor& c = g.constructor(n.constructor_id);
  out.push_back("(");
  out.push_back(c.name);
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    const asdl::Field& f = c.fields[i];
    bool grouped = f.cardinality != asdl::Cardinality::Single;
    if (grouped) out.push_back("[");
    for (int child : n.children[i]) generic_print(g, ast, f.type_name, child, out);
    if (grouped) out.push_back("]");
  }
  out.push_back(")");
}

class GenericParser {
 public:
  GenericParser(const asdl::AsdlGrammar& g, const std::vector<std::string>& toks)
      : g_(g), toks_(toks) {}

  asdl::Ast run() {
    ast_.root = parse_value(g_.root_type());
    if (pos_ != toks_.size()) throw MrSyntaxError("trailing tokens after value");
    return std::move(ast_);
  }

 private:
  const std::string& peek() const {
    static const std::string kEnd = "";
    return pos_ < toks_.size() ? toks_[pos_] : kEnd;
  }
  std::string next() {
    if (pos_ >= toks_.size()) throw MrSyntaxError("unexpected end of tokens");
    return toks_[pos_++];
  }
  void expect(const std::string& t) {
    std::string got = next();
    if (got != t) throw MrSyntaxError("expected '" + t + "', got '" + got + "'");
  }

  int parse_value(const std::string& type_name) {
    if (g_.is_primitive(type_name)) {
      if (g_.is_multitoken(type_name)) {
        expect("{");
        std::vector<std::string> toks;
        while (peek() != "}") toks.push_back(next());
        expect("}");
        return ast_.add_primitive(std::move(toks));
      }
      std::string t = next();
      if (kStructural.count(t))
        throw MrSyntaxError("structural token '" + t + "' where a value was expected");
      return ast_.add_primitive({t});
    }
    expect("(");
    std::string name = next();
    int ctor = g_.constructor_id(name);
    if (ctor < 0) throw MrSyntaxError("unknown constructor '" + name + "'");
    const asdl::Constructor& c = g_.constructor(ctor);
    if (c.result_type != type_name)
      throw MrSyntaxError("constructor '" + name + "' builds " + c.result_type + ", wanted " +
                          type_name);
    int node = ast_.add_composite(ctor, c.fields.size());
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
      const asdl::Field& f = c.fields[i];
      if (f.cardinality == asdl::Cardinality::Single) {
        int child = parse_value(f.type_name);
        ast_.node(node).children[i] = {child};
        continue;
      }
      expect("[");
      while (peek() != "]") {
        if (f.cardinality == asdl::Cardinality::Optional && !ast_.node(node).children[i].empty())
          throw MrSyntaxError("optional field '" + f.name + "' holds more than one value");
        int child = parse_value(f.type_name);
        ast_.node(node).children[i].push_back(child);
      }
      expect("]");
    }
    expect(")");
    return node;
  }

  const asdl::AsdlGrammar& g_;
  const std::vector<std::string>& toks_;
  std::size_t pos_ = 0;
  asdl::Ast ast_;
};

}  // namespace

const char* to_string(MrKind k) {
  switch (k) {
    case MrKind::Lambda:
      return "lambda";
    case MrKind::PyLite:
      return "pylite";
    case MrKind::Generic:
      return "generic";
  }
  return "?";
}

MrKind mr_kind_from_string(const std::string& s) {
  if (s == "lambda") return MrKind::Lambda;
  if (s == "pylite") return MrKind::PyLite;
  if (s == "generic") return MrKind::Generic;
  throw MrSyntaxError("unknown MR kind '" + s + "'");
}

LinearMR linearize(const asdl::AsdlGrammar& g, const asdl::Ast& z, MrKind kind) {
  LinearMR m;
  m.kind = kind;
  switch (kind) {
    case MrKind::Lambda:
      m.tokens = lf_tokenize(lf_print(g, z));
      break;
    case MrKind::PyLite:
      m.tokens = pylite_tokenize(pylite_print(g, z));
      break;
    case MrKind::Generic: {
      std::string why;
      if (!asdl::conforms(g, z, &why)) throw MrSyntaxError("nonconforming tree: " + why);
      generic_print(g, z, g.root_type(), z.root, m.tokens);
      break;
    }
  }
  if (m.tokens.empty()) throw MrSyntaxError("linearization produced no tokens");
  return m;
}

asdl::Ast delinearize(const asdl::AsdlGrammar& g, const LinearMR& m) {
  if (m.tokens.empty()) throw MrSyntaxError("empty token sequence");
  switch (m.kind) {
    case MrKind::Lambda:
      return lf_parse(g, util::join(m.tokens, " "));
    case MrKind::PyLite:
      return pylite_parse(g, util::join(m.tokens, " "));
    case MrKind::Generic: {
      asdl::Ast ast = GenericParser(g, m.tokens).run();
      std::string why;
      if (!asdl::conforms(g, ast, &why)) throw MrSyntaxError("nonconforming tree: " + why);
      return ast;
    }
  }
  throw MrSyntaxError("unknown MR kind");
}

bool syntax_check(const asdl::AsdlGrammar& g, const LinearMR& m) {
  try {
    delinearize(g, m);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

std::string surface(const LinearMR& m) { return util::join(m.tokens, " "); }

}  // namespace sempar::mr
