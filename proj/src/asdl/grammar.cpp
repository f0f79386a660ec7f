#include "sempar/asdl/grammar.hpp"

#include <cctype>
#include <sstream>

#include "sempar/util/text.hpp"

namespace sempar::asdl {

const char* cardinality_suffix(Cardinality c) {
  switch (c) {
    case Cardinality::Single: return "";
    case Cardinality::Optional: return "?";
    case Cardinality::Sequential: return "*";
  }
  return "";
}

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit Cursor(const std::string& t) : text(t) {}

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_space_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "grammar syntax error at line " << line << ", column " << col << ": " << msg;
    throw GrammarError(os.str(), line, col);
  }

  std::string ident() {
    skip_space_and_comments();
    if (eof()) fail("expected identifier, found end of input");
    char c = peek();
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) {
      fail(std::string("expected identifier, found '") + c + "'");
    }
    std::string out;
    while (!eof()) {
      c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(c);
        advance();
      } else {
        break;
      }
    }
    return out;
  }

  bool try_consume(char c) {
    skip_space_and_comments();
    if (!eof() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space_and_comments();
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }
};

// header lines look like "primitives: a, b, c"; detect by keyword + ':'
bool peek_header(Cursor& cur, const char* keyword) {
  cur.skip_space_and_comments();
  size_t n = std::string(keyword).size();
  if (cur.text.compare(cur.pos, n, keyword) != 0) return false;
  size_t p = cur.pos + n;
  while (p < cur.text.size() && (cur.text[p] == ' ' || cur.text[p] == '\t')) ++p;
  return p < cur.text.size() && cur.text[p] == ':';
}

std::vector<std::string> parse_header_list(Cursor& cur, const char* keyword) {
  for (size_t i = 0; keyword[i]; ++i) cur.advance();
  cur.expect(':');
  std::vector<std::string> names;
  names.push_back(cur.ident());
  while (cur.try_consume(',')) names.push_back(cur.ident());
  return names;
}

}  // namespace

void AsdlGrammar::index() {
  constructor_index_.clear();
  types_.clear();
  type_order_.clear();
  field_id_base_.clear();
  type_ids_.clear();
  total_fields_ = 0;

  for (int i = 0; i < static_cast<int>(constructors_.size()); ++i) {
    const Constructor& c = constructors_[i];
    constructor_index_.emplace(c.name, i);
    auto it = types_.find(c.result_type);
    if (it == types_.end()) {
      types_[c.result_type] = TypeDef{c.result_type, {i}};
      type_order_.push_back(c.result_type);
    } else {
      it->second.constructor_ids.push_back(i);
    }
    field_id_base_.push_back(1 + total_fields_);  // id 0 reserved for the root field
    total_fields_ += static_cast<int>(c.fields.size());
  }
  for (const std::string& t : type_order_) {
    type_ids_.emplace(t, static_cast<int>(type_ids_.size()));
  }
  for (const std::string& t : primitive_types_) {
    type_ids_.emplace(t, static_cast<int>(type_ids_.size()));
  }
}

std::vector<const Constructor*> AsdlGrammar::constructors_of(const std::string& type_name) const {
  std::vector<const Constructor*> out;
  for (int id : constructor_ids_of(type_name)) out.push_back(&constructors_[id]);
  return out;
}

const std::vector<int>& AsdlGrammar::constructor_ids_of(const std::string& type_name) const {
  auto it = types_.find(type_name);
  if (it == types_.end()) {
    if (is_primitive(type_name)) {
      throw GrammarError("type '" + type_name + "' is primitive and has no constructors");
    }
    throw GrammarError("unknown type '" + type_name + "'");
  }
  return it->second.constructor_ids;
}

int AsdlGrammar::constructor_id(const std::string& name) const {
  auto it = constructor_index_.find(name);
  return it == constructor_index_.end() ? -1 : it->second;
}

int AsdlGrammar::field_id(int constructor_id, int field_index) const {
  return field_id_base_[constructor_id] + field_index;
}

int AsdlGrammar::type_id(const std::string& type_name) const {
  auto it = type_ids_.find(type_name);
  if (it == type_ids_.end()) throw GrammarError("unknown type '" + type_name + "'");
  return it->second;
}

AsdlGrammar AsdlGrammar::build(std::string root_type, std::vector<Constructor> constructors,
                               std::set<std::string> primitives,
                               std::set<std::string> multitoken) {
  AsdlGrammar g;
  g.root_type_ = std::move(root_type);
  g.constructors_ = std::move(constructors);
  g.primitive_types_ = std::move(primitives);
  g.multitoken_ = std::move(multitoken);
  g.index();
  return g;
}

AsdlGrammar parse_grammar(const std::string& text, const std::string& root_type) {
  AsdlGrammar g;
  g.root_type_ = root_type;
  Cursor cur(text);

  while (peek_header(cur, "primitives") || peek_header(cur, "multitoken")) {
    if (peek_header(cur, "primitives")) {
      for (const std::string& n : parse_header_list(cur, "primitives")) {
        g.primitive_types_.insert(n);
      }
    } else {
      for (const std::string& n : parse_header_list(cur, "multitoken")) {
        g.multitoken_.insert(n);
      }
    }
  }

  std::set<std::string> seen_ctor_names;
  std::map<std::pair<std::string, std::string>, int> field_pos;  // (ctor, field) -> line
  while (true) {
    cur.skip_space_and_comments();
    if (cur.eof()) break;
    int type_line = cur.line;
    std::string type_name = cur.ident();
    if (g.primitive_types_.count(type_name)) {
      throw GrammarError("type '" + type_name + "' declared both primitive and composite",
                         type_line);
    }
    cur.expect('=');
    while (true) {
      int ctor_line = cur.line;
      Constructor ctor;
      ctor.name = cur.ident();
      ctor.result_type = type_name;
      if (!seen_ctor_names.insert(ctor.name).second) {
        throw GrammarError("duplicate constructor name '" + ctor.name + "'", ctor_line);
      }
      if (cur.try_consume('(')) {
        if (!cur.try_consume(')')) {
          while (true) {
            Field f;
            int field_line = cur.line;
            f.type_name = cur.ident();
            if (cur.try_consume('*')) {
              f.cardinality = Cardinality::Sequential;
            } else if (cur.try_consume('?')) {
              f.cardinality = Cardinality::Optional;
            }
            f.name = cur.ident();
            for (const Field& prev : ctor.fields) {
              if (prev.name == f.name) {
                throw GrammarError("duplicate field name '" + f.name + "' in constructor '" +
                                       ctor.name + "'",
                                   cur.line);
              }
            }
            field_pos[{ctor.name, f.name}] = field_line;
            ctor.fields.push_back(std::move(f));
            if (cur.try_consume(')')) break;
            cur.expect(',');
          }
        }
      }
      g.constructors_.push_back(std::move(ctor));
      if (!cur.try_consume('|')) break;
    }
  }

  g.index();

  // a parsed grammar always satisfies the invariants
  for (const Constructor& c : g.constructors_) {
    for (const Field& f : c.fields) {
      if (!g.has_composite(f.type_name) && !g.is_primitive(f.type_name)) {
        auto pos = field_pos.find({c.name, f.name});
        throw GrammarError("unresolved type '" + f.type_name + "' in field '" + c.name + "." +
                               f.name + "'",
                           pos == field_pos.end() ? -1 : pos->second);
      }
    }
  }
  for (const std::string& m : g.multitoken_) {
    if (!g.primitive_types_.count(m)) {
      throw GrammarError("multitoken type '" + m + "' is not a declared primitive");
    }
  }
  if (!g.has_composite(root_type)) {
    throw GrammarError("root type '" + root_type + "' has no productions");
  }
  return g;
}

std::vector<Diagnostic> validate_grammar(const AsdlGrammar& g) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const Constructor& c : g.constructors()) {
    if (!names.insert(c.name).second) {
      out.push_back({"duplicate constructor name '" + c.name + "'"});
    }
    std::set<std::string> field_names;
    for (const Field& f : c.fields) {
      if (!field_names.insert(f.name).second) {
        out.push_back({"duplicate field name '" + f.name + "' in constructor '" + c.name + "'"});
      }
      if (!g.has_composite(f.type_name) && !g.is_primitive(f.type_name)) {
        out.push_back({"field '" + c.name + "." + f.name + "' has unresolved type '" +
                       f.type_name + "'"});
      }
    }
  }
  if (!g.has_composite(g.root_type())) {
    out.push_back({"root type '" + g.root_type() + "' is missing"});
  }
  return out;
}

std::string render(const AsdlGrammar& g) {
  std::ostringstream os;
  if (!g.primitive_types().empty()) {
    os << "primitives: ";
    bool first = true;
    for (const std::string& p : g.primitive_types()) {
      if (!first) os << ", ";
      os << p;
      first = false;
    }
    os << "\n";
  }
  if (!g.multitoken_primitives().empty()) {
    os << "multitoken: ";
    bool first = true;
    for (const std::string& p : g.multitoken_primitives()) {
      if (!first) os << ", ";
      os << p;
      first = false;
    }
    os << "\n";
  }
  for (const std::string& t : g.composite_types()) {
    os << "\n" << t << " = ";
    bool first_ctor = true;
    for (const Constructor* c : g.constructors_of(t)) {
      if (!first_ctor) os << "\n" << std::string(t.size() + 1, ' ') << "| ";
      first_ctor = false;
      os << c->name;
      if (!c->fields.empty()) {
        os << "(";
        for (size_t i = 0; i < c->fields.size(); ++i) {
          if (i) os << ", ";
          const Field& f = c->fields[i];
          os << f.type_name << cardinality_suffix(f.cardinality) << " " << f.name;
        }
        os << ")";
      }
    }
  }
  os << "\n";
  return os.str();
}

}  // namespace sempar::asdl
