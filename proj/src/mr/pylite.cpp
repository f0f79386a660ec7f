#include "sempar/mr/pylite.hpp"

#include <cctype>
#include <set>

#include "sempar/util/text.hpp"

namespace sempar::mr {

namespace {

const std::set<std::string> kReserved = {"if", "elif", "for", "in", "return", "pass"};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

bool is_name_token(const std::string& t) {
  return !t.empty() && is_name_start(t[0]) && !kReserved.count(t);
}
bool is_number_token(const std::string& t) {
  return !t.empty() && std::isdigit(static_cast<unsigned char>(t[0]));
}
bool is_string_token(const std::string& t) { return t.size() >= 2 && t.front() == '\''; }

struct Ids {
  int Expr, Assign, Return, If, Elif, For;
  int Call, Attribute, Subscript, Name, Tuple, Str, Num, BinOp;
  int Add, Sub, Mult, Div, keyword;

  explicit Ids(const asdl::AsdlGrammar& g) {
    auto need = [&](const char* n) {
      int id = g.constructor_id(n);
      if (id < 0) throw MrSyntaxError(std::string("grammar lacks constructor '") + n + "'");
      return id;
    };
    Expr = need("Expr");
    Assign = need("Assign");
    Return = need("Return");
    If = need("If");
    Elif = need("Elif");
    For = need("For");
    Call = need("Call");
    Attribute = need("Attribute");
    Subscript = need("Subscript");
    Name = need("Name");
    Tuple = need("Tuple");
    Str = need("Str");
    Num = need("Num");
    BinOp = need("BinOp");
    Add = need("Add");
    Sub = need("Sub");
    Mult = need("Mult");
    Div = need("Div");
    keyword = need("keyword");
  }
};

class Parser {
 public:
  Parser(const asdl::AsdlGrammar& g, std::vector<std::string> tokens)
      : ids_(g), toks_(std::move(tokens)) {}

  asdl::Ast run() {
    ast_.root = parse_stmt();
    if (pos_ != toks_.size())
      throw MrSyntaxError("trailing tokens after statement: '" + peek() + "'");
    return std::move(ast_);
  }

 private:
  const std::string& peek(std::size_t ahead = 0) const {
    static const std::string kEnd = "";
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : kEnd;
  }
  std::string next() {
    if (pos_ >= toks_.size()) throw MrSyntaxError("unexpected end of statement");
    return toks_[pos_++];
  }
  bool try_consume(const std::string& t) {
    if (peek() == t) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& t) {
    std::string got = next();
    if (got != t) throw MrSyntaxError("expected '" + t + "', got '" + got + "'");
  }

  int parse_stmt() {
    if (peek() == "if" || peek() == "elif") {
      bool elif = next() == "elif";
      int test = parse_arith();
      expect(":");
      expect("pass");
      int node = ast_.add_composite(elif ? ids_.Elif : ids_.If, 1);
      ast_.node(node).children[0] = {test};
      return node;
    }
    if (try_consume("for")) {
      int target = parse_testlist();
      expect("in");
      int iter = parse_arith();
      expect(":");
      expect("pass");
      int node = ast_.add_composite(ids_.For, 2);
      ast_.node(node).children[0] = {target};
      ast_.node(node).children[1] = {iter};
      return node;
    }
    if (try_consume("return")) {
      int node = ast_.add_composite(ids_.Return, 1);
      if (pos_ < toks_.size()) ast_.node(node).children[0] = {parse_testlist()};
      return node;
    }
    // Expr or Assign: '='-separated value lists, the final one is the value
    std::vector<int> groups{parse_testlist()};
    while (try_consume("=")) groups.push_back(parse_testlist());
    if (groups.size() == 1) {
      int node = ast_.add_composite(ids_.Expr, 1);
      ast_.node(node).children[0] = {groups[0]};
      return node;
    }
    int node = ast_.add_composite(ids_.Assign, 2);
    for (std::size_t i = 0; i + 1 < groups.size(); ++i)
      ast_.node(node).children[0].push_back(groups[i]);
    ast_.node(node).children[1] = {groups.back()};
    return node;
  }

  // expr (',' expr)* — two or more become a Tuple
  int parse_testlist() {
    std::vector<int> elts{parse_arith()};
    while (try_consume(",")) elts.push_back(parse_arith());
    if (elts.size() == 1) return elts[0];
    int node = ast_.add_composite(ids_.Tuple, 1);
    ast_.node(node).children[0] = elts;
    return node;
  }

  int binop(int left, int op, int right) {
    int node = ast_.add_composite(ids_.BinOp, 3);
    ast_.node(node).children[0] = {left};
    ast_.node(node).children[1] = {ast_.add_composite(op, 0)};
    ast_.node(node).children[2] = {right};
    return node;
  }

  int parse_arith() {
    int left = parse_term();
    while (peek() == "+" || peek() == "-") {
      int op = next() == "+" ? ids_.Add : ids_.Sub;
      left = binop(left, op, parse_term());
    }
    return left;
  }

  int parse_term() {
    int left = parse_primary();
    while (peek() == "*" || peek() == "/") {
      int op = next() == "*" ? ids_.Mult : ids_.Div;
      left = binop(left, op, parse_primary());
    }
    return left;
  }

  int parse_primary() {
    int node = parse_atom();
    while (true) {
      if (try_consume(".")) {
        std::string attr = next();
        if (!is_name_token(attr)) throw MrSyntaxError("expected attribute name after '.'");
        int wrap = ast_.add_composite(ids_.Attribute, 2);
        ast_.node(wrap).children[0] = {node};
        ast_.node(wrap).children[1] = {ast_.add_primitive({attr})};
        node = wrap;
      } else if (try_consume("[")) {
        int index = parse_arith();
        expect("]");
        int wrap = ast_.add_composite(ids_.Subscript, 2);
        ast_.node(wrap).children[0] = {node};
        ast_.node(wrap).children[1] = {index};
        node = wrap;
      } else if (try_consume("(")) {
        node = parse_call(node);
      } else {
        return node;
      }
    }
  }

  int parse_call(int func) {
    int node = ast_.add_composite(ids_.Call, 3);
    ast_.node(node).children[0] = {func};
    bool saw_keyword = false;
    if (!try_consume(")")) {
      while (true) {
        if (is_name_token(peek()) && peek(1) == "=") {
          std::string arg = next();
          expect("=");
          int kw = ast_.add_composite(ids_.keyword, 2);
          ast_.node(kw).children[0] = {ast_.add_primitive({arg})};
          ast_.node(kw).children[1] = {parse_arith()};
          ast_.node(node).children[2].push_back(kw);
          saw_keyword = true;
        } else {
          if (saw_keyword) throw MrSyntaxError("positional argument after keyword argument");
          ast_.node(node).children[1].push_back(parse_arith());
        }
        if (try_consume(")")) break;
        expect(",");
      }
    }
    return node;
  }

  int parse_atom() {
    std::string t = next();
    if (t == "(") {
      int inner = parse_testlist();
      expect(")");
      return inner;
    }
    if (is_string_token(t)) {
      int node = ast_.add_composite(ids_.Str, 1);
      std::string body = t.substr(1, t.size() - 2);
      int prim = ast_.add_primitive(util::split_ws(body));
      ast_.node(node).children[0] = {prim};
      return node;
    }
    if (is_number_token(t)) {
      int node = ast_.add_composite(ids_.Num, 1);
      ast_.node(node).children[0] = {ast_.add_primitive({t})};
      return node;
    }
    if (is_name_token(t)) {
      int node = ast_.add_composite(ids_.Name, 1);
      ast_.node(node).children[0] = {ast_.add_primitive({t})};
      return node;
    }
    throw MrSyntaxError("unexpected token '" + t + "'");
  }

  Ids ids_;
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
  asdl::Ast ast_;
};

class Printer {
 public:
  Printer(const asdl::AsdlGrammar& g, const asdl::Ast& ast) : ids_(g), ast_(ast) {}

  std::string run() const {
    const asdl::AstNode& n = ast_.node(ast_.root);
    int c = n.constructor_id;
    if (c == ids_.Expr) return expr(n.children[0][0], 0);
    if (c == ids_.Assign) {
      if (n.children[0].empty())
        throw MrSyntaxError("assignment without targets has no surface form");
      std::string out;
      for (int t : n.children[0]) out += expr(t, 0) + " = ";
      return out + expr(n.children[1][0], 0);
    }
    if (c == ids_.Return)
      return n.children[0].empty() ? "return" : "return " + expr(n.children[0][0], 0);
    if (c == ids_.If) return "if " + expr(n.children[0][0], 1) + ": pass";
    if (c == ids_.Elif) return "elif " + expr(n.children[0][0], 1) + ": pass";
    if (c == ids_.For)
      return "for " + expr(n.children[0][0], 0) + " in " + expr(n.children[1][0], 1) + ": pass";
    throw MrSyntaxError("printer met a non-statement root");
  }

 private:
  // precedence: 0 bare tuple, 1 +/-, 2 * and /, 3 postfix and atoms
  int prec(const asdl::AstNode& n) const {
    int c = n.constructor_id;
    if (c == ids_.Tuple) return 0;
    if (c == ids_.BinOp) {
      int op = ast_.node(n.children[1][0]).constructor_id;
      return (op == ids_.Add || op == ids_.Sub) ? 1 : 2;
    }
    return 3;
  }

  std::string expr(int id, int min_prec) const {
    const asdl::AstNode& n = ast_.node(id);
    std::string out = raw(n);
    if (prec(n) < min_prec) return "(" + out + ")";
    return out;
  }

  const std::string& tok(const asdl::AstNode& n, int field) const {
    return ast_.node(n.children[field][0]).tokens[0];
  }

  std::string raw(const asdl::AstNode& n) const {
    int c = n.constructor_id;
    if (c == ids_.Name || c == ids_.Num) return tok(n, 0);
    if (c == ids_.Str) {
      const asdl::AstNode& s = ast_.node(n.children[0][0]);
      return "'" + util::join(s.tokens, " ") + "'";
    }
    if (c == ids_.Tuple) {
      if (n.children[0].size() < 2)
        throw MrSyntaxError("tuples below two elements have no surface form here");
      std::string out;
      for (std::size_t i = 0; i < n.children[0].size(); ++i) {
        if (i) out += ", ";
        out += expr(n.children[0][i], 1);
      }
      return out;
    }
    if (c == ids_.Attribute) return expr(n.children[0][0], 3) + "." + tok(n, 1);
    if (c == ids_.Subscript)
      return expr(n.children[0][0], 3) + "[" + expr(n.children[1][0], 1) + "]";
    if (c == ids_.Call) {
      std::string out = expr(n.children[0][0], 3) + "(";
      bool first = true;
      for (int a : n.children[1]) {
        if (!first) out += ", ";
        first = false;
        out += expr(a, 1);
      }
      for (int k : n.children[2]) {
        if (!first) out += ", ";
        first = false;
        const asdl::AstNode& kw = ast_.node(k);
        out += tok(kw, 0) + "=" + expr(kw.children[1][0], 1);
      }
      return out + ")";
    }
    if (c == ids_.BinOp) {
      int self = prec(n);
      int op = ast_.node(n.children[1][0]).constructor_id;
      const char* sym = op == ids_.Add ? " + " : op == ids_.Sub ? " - "
                        : op == ids_.Mult ? " * " : " / ";
      return expr(n.children[0][0], self) + sym + expr(n.children[2][0], self + 1);
    }
    throw MrSyntaxError("printer met an unexpected constructor");
  }

  Ids ids_;
  const asdl::Ast& ast_;
};

}  // namespace

std::vector<std::string> pylite_tokenize(const std::string& code) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = code.size();
  while (i < n) {
    char c = code[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (is_name_start(c)) {
      std::size_t j = i;
      while (j < n && is_name_char(code[j])) ++j;
      out.push_back(code.substr(i, j - i));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(code[j]))) ++j;
      if (j < n && code[j] == '.' && j + 1 < n &&
          std::isdigit(static_cast<unsigned char>(code[j + 1]))) {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(code[j]))) ++j;
      }
      out.push_back(code.substr(i, j - i));
      i = j;
      continue;
    }
    if (c == '\'') {
      std::size_t j = code.find('\'', i + 1);
      if (j == std::string::npos) throw MrSyntaxError("unterminated string literal");
      out.push_back(code.substr(i, j - i + 1));
      i = j + 1;
      continue;
    }
    if (std::string("()[],.=:+-*/").find(c) != std::string::npos) {
      out.push_back(std::string(1, c));
      ++i;
      continue;
    }
    throw MrSyntaxError(std::string("character '") + c + "' is outside the subset");
  }
  return out;
}

asdl::Ast pylite_parse(const asdl::AsdlGrammar& g, const std::string& code) {
  std::vector<std::string> toks = pylite_tokenize(code);
  if (toks.empty()) throw MrSyntaxError("empty statement");
  asdl::Ast ast = Parser(g, std::move(toks)).run();
  std::string why;
  if (!asdl::conforms(g, ast, &why)) throw MrSyntaxError("parsed tree nonconforming: " + why);
  return ast;
}

std::string pylite_print(const asdl::AsdlGrammar& g, const asdl::Ast& z) {
  std::string why;
  if (!asdl::conforms(g, z, &why)) throw MrSyntaxError("nonconforming tree: " + why);
  return Printer(g, z).run();
}

}  // namespace sempar::mr
