#include "sempar/mr/lambda_form.hpp"

#include <cctype>
#include <map>

namespace sempar::mr {

namespace {

bool is_var(const std::string& s) {
  if (s.size() < 2 || s[0] != '$') return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool is_number(const std::string& s) {
  bool dot = false, digit = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.' && !dot && i > 0) {
      dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else {
      return false;
    }
  }
  return digit;
}

struct Ids {
  int Variable, Entity, Number, Apply, Argmax, Argmin, Count, Exists, Lambda, Max, Min, Sum, The,
      Not, And, Or, Compare, Equal, LessThan, GreaterThan;

  explicit Ids(const asdl::AsdlGrammar& g)
      : Variable(need(g, "Variable")),
        Entity(need(g, "Entity")),
        Number(need(g, "Number")),
        Apply(need(g, "Apply")),
        Argmax(need(g, "Argmax")),
        Argmin(need(g, "Argmin")),
        Count(need(g, "Count")),
        Exists(need(g, "Exists")),
        Lambda(need(g, "Lambda")),
        Max(need(g, "Max")),
        Min(need(g, "Min")),
        Sum(need(g, "Sum")),
        The(need(g, "The")),
        Not(need(g, "Not")),
        And(need(g, "And")),
        Or(need(g, "Or")),
        Compare(need(g, "Compare")),
        Equal(need(g, "Equal")),
        LessThan(need(g, "LessThan")),
        GreaterThan(need(g, "GreaterThan")) {}

  static int need(const asdl::AsdlGrammar& g, const std::string& name) {
    int id = g.constructor_id(name);
    if (id < 0) throw MrSyntaxError("grammar lacks constructor '" + name + "'");
    return id;
  }
};

class Parser {
 public:
  Parser(const asdl::AsdlGrammar& g, std::vector<std::string> tokens)
      : ids_(g), tokens_(std::move(tokens)) {}

  asdl::Ast run() {
    int root = parse_expr();
    if (pos_ != tokens_.size()) throw MrSyntaxError("trailing tokens after expression");
    ast_.root = root;
    return std::move(ast_);
  }

 private:
  const std::string& peek() const {
    static const std::string kEnd = "";
    return pos_ < tokens_.size() ? tokens_[pos_] : kEnd;
  }
  std::string next() {
    if (pos_ >= tokens_.size()) throw MrSyntaxError("unexpected end of expression");
    return tokens_[pos_++];
  }
  void expect(const std::string& tok) {
    std::string got = next();
    if (got != tok) throw MrSyntaxError("expected '" + tok + "', got '" + got + "'");
  }
  bool at_close() const { return peek() == ")"; }

  int leaf(int ctor, const std::string& token) {
    int prim = ast_.add_primitive({token});
    int node = ast_.add_composite(ctor, 1);
    ast_.node(node).children[0] = {prim};
    return node;
  }

  int parse_var() {
    std::string v = next();
    if (!is_var(v)) throw MrSyntaxError("expected a $-variable, got '" + v + "'");
    return ast_.add_primitive({v});
  }

  // binder ctor with fields (var, expr) or (var, expr, expr)
  int parse_binder(int ctor, int expr_fields) {
    int node = ast_.add_composite(ctor, 1 + expr_fields);
    ast_.node(node).children[0] = {parse_var()};
    for (int i = 0; i < expr_fields; ++i) ast_.node(node).children[1 + i] = {parse_expr()};
    expect(")");
    return node;
  }

  int parse_expr() {
    std::string tok = next();
    if (tok == ")") throw MrSyntaxError("unexpected ')'");
    if (tok != "(") {
      if (is_var(tok)) return leaf(ids_.Variable, tok);
      if (is_number(tok)) return leaf(ids_.Number, tok);
      return leaf(ids_.Entity, tok);
    }
    std::string head = next();
    if (head == "(" || head == ")")
      throw MrSyntaxError("expected an operator or predicate after '('");

    if (head == "lambda") {
      int node = ast_.add_composite(ids_.Lambda, 3);
      ast_.node(node).children[0] = {parse_var()};
      std::string vt = next();
      if (vt == "(" || vt == ")") throw MrSyntaxError("lambda needs an atomic type");
      ast_.node(node).children[1] = {ast_.add_primitive({vt})};
      ast_.node(node).children[2] = {parse_expr()};
      expect(")");
      return node;
    }
    if (head == "and" || head == "or") {
      int node = ast_.add_composite(head == "and" ? ids_.And : ids_.Or, 1);
      while (!at_close()) ast_.node(node).children[0].push_back(parse_expr());
      expect(")");
      return node;
    }
    if (head == "not") {
      int node = ast_.add_composite(ids_.Not, 1);
      ast_.node(node).children[0] = {parse_expr()};
      expect(")");
      return node;
    }
    if (head == "argmax") return parse_binder(ids_.Argmax, 2);
    if (head == "argmin") return parse_binder(ids_.Argmin, 2);
    if (head == "sum") return parse_binder(ids_.Sum, 2);
    if (head == "count") return parse_binder(ids_.Count, 1);
    if (head == "exists") return parse_binder(ids_.Exists, 1);
    if (head == "max") return parse_binder(ids_.Max, 1);
    if (head == "min") return parse_binder(ids_.Min, 1);
    if (head == "the") return parse_binder(ids_.The, 1);
    if (head == "=" || head == "<" || head == ">") {
      int op = head == "=" ? ids_.Equal : head == "<" ? ids_.LessThan : ids_.GreaterThan;
      int node = ast_.add_composite(ids_.Compare, 3);
      ast_.node(node).children[0] = {ast_.add_composite(op, 0)};
      ast_.node(node).children[1] = {parse_expr()};
      ast_.node(node).children[2] = {parse_expr()};
      expect(")");
      return node;
    }
    // head application: (predicate arg ...)
    int node = ast_.add_composite(ids_.Apply, 2);
    ast_.node(node).children[0] = {ast_.add_primitive({head})};
    while (!at_close()) ast_.node(node).children[1].push_back(parse_expr());
    expect(")");
    return node;
  }

  Ids ids_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  asdl::Ast ast_;
};

class Printer {
 public:
  Printer(const asdl::AsdlGrammar& g, const asdl::Ast& ast) : ids_(g), ast_(ast) {}

  std::string run() const { return print(ast_.root); }

 private:
  const std::string& tok(int node, int field) const {
    return ast_.node(ast_.node(node).children[field][0]).tokens[0];
  }

  std::string binder(const char* head, int node, int expr_fields) const {
    std::string out = "(";
    out += head;
    out += ' ';
    out += tok(node, 0);
    for (int i = 0; i < expr_fields; ++i) {
      out += ' ';
      out += print(ast_.node(node).children[1 + i][0]);
    }
    out += ')';
    return out;
  }

  std::string list(const char* head, const std::vector<int>& args) const {
    std::string out = "(";
    out += head;
    for (int a : args) {
      out += ' ';
      out += print(a);
    }
    out += ')';
    return out;
  }

  std::string print(int id) const {
    const asdl::AstNode& n = ast_.node(id);
    int c = n.constructor_id;
    if (c == ids_.Variable || c == ids_.Entity || c == ids_.Number) return tok(id, 0);
    if (c == ids_.Apply) return list(tok(id, 0).c_str(), n.children[1]);
    if (c == ids_.Lambda)
      return "(lambda " + tok(id, 0) + " " + tok(id, 1) + " " + print(n.children[2][0]) + ")";
    if (c == ids_.And) return list("and", n.children[0]);
    if (c == ids_.Or) return list("or", n.children[0]);
    if (c == ids_.Not) return "(not " + print(n.children[0][0]) + ")";
    if (c == ids_.Argmax) return binder("argmax", id, 2);
    if (c == ids_.Argmin) return binder("argmin", id, 2);
    if (c == ids_.Sum) return binder("sum", id, 2);
    if (c == ids_.Count) return binder("count", id, 1);
    if (c == ids_.Exists) return binder("exists", id, 1);
    if (c == ids_.Max) return binder("max", id, 1);
    if (c == ids_.Min) return binder("min", id, 1);
    if (c == ids_.The) return binder("the", id, 1);
    if (c == ids_.Compare) {
      int op = ast_.node(n.children[0][0]).constructor_id;
      const char* sym = op == ids_.Equal ? "=" : op == ids_.LessThan ? "<" : ">";
      return std::string("(") + sym + " " + print(n.children[1][0]) + " " +
             print(n.children[2][0]) + ")";
    }
    throw MrSyntaxError("printer met an unexpected constructor");
  }

  Ids ids_;
  const asdl::Ast& ast_;
};

}  // namespace

std::vector<std::string> lf_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '(' || c == ')') {
      flush();
      out.push_back(std::string(1, c));
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

asdl::Ast lf_parse(const asdl::AsdlGrammar& g, const std::string& text) {
  std::vector<std::string> toks = lf_tokenize(text);
  if (toks.empty()) throw MrSyntaxError("empty expression");
  asdl::Ast ast = Parser(g, std::move(toks)).run();
  std::string why;
  if (!asdl::conforms(g, ast, &why)) throw MrSyntaxError("parsed tree nonconforming: " + why);
  return ast;
}

std::string lf_print(const asdl::AsdlGrammar& g, const asdl::Ast& z) {
  std::string why;
  if (!asdl::conforms(g, z, &why)) throw MrSyntaxError("nonconforming tree: " + why);
  return Printer(g, z).run();
}

}  // namespace sempar::mr
