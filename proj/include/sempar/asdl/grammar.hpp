#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sempar::asdl {

enum class Cardinality { Single, Optional, Sequential };

const char* cardinality_suffix(Cardinality c);

struct Field {
  std::string name;
  std::string type_name;
  Cardinality cardinality = Cardinality::Single;

  bool operator==(const Field&) const = default;
};

struct Constructor {
  std::string name;
  std::string result_type;
  std::vector<Field> fields;

  bool operator==(const Constructor&) const = default;
};

struct TypeDef {
  std::string name;
  std::vector<int> constructor_ids;  // indices into AsdlGrammar::constructors, source order
};

struct Diagnostic {
  std::string message;
};

class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::string msg, int line = -1, int column = -1)
      : std::runtime_error(std::move(msg)), line(line), column(column) {}
  int line;
  int column;
};

// Immutable after parse; shared read-only across threads.
class AsdlGrammar {
 public:
  const std::string& root_type() const { return root_type_; }
  const std::vector<Constructor>& constructors() const { return constructors_; }
  const std::vector<std::string>& composite_types() const { return type_order_; }
  const std::set<std::string>& primitive_types() const { return primitive_types_; }
  const std::set<std::string>& multitoken_primitives() const { return multitoken_; }

  bool is_primitive(const std::string& type_name) const {
    return primitive_types_.count(type_name) > 0;
  }
  bool is_multitoken(const std::string& type_name) const {
    return multitoken_.count(type_name) > 0;
  }
  bool has_composite(const std::string& type_name) const {
    return types_.count(type_name) > 0;
  }

  // constructors whose result type is t, in source order
  std::vector<const Constructor*> constructors_of(const std::string& type_name) const;
  const std::vector<int>& constructor_ids_of(const std::string& type_name) const;

  int constructor_id(const std::string& name) const;  // -1 when absent
  const Constructor& constructor(int id) const { return constructors_[id]; }

  // globally unique id per declared field, used for embeddings; root field is id 0
  static constexpr int kRootFieldId = 0;
  int field_id(int constructor_id, int field_index) const;
  int field_count() const { return 1 + total_fields_; }

  int type_id(const std::string& type_name) const;  // over composite + primitive type names
  int type_count() const { return static_cast<int>(type_ids_.size()); }

  // assembles a grammar without invariant enforcement (validate_grammar reports violations)
  static AsdlGrammar build(std::string root_type, std::vector<Constructor> constructors,
                           std::set<std::string> primitives,
                           std::set<std::string> multitoken = {});

  friend AsdlGrammar parse_grammar(const std::string& text, const std::string& root_type);

 private:
  std::string root_type_;
  std::vector<Constructor> constructors_;
  std::map<std::string, TypeDef> types_;
  std::vector<std::string> type_order_;
  std::set<std::string> primitive_types_;
  std::set<std::string> multitoken_;
  std::map<std::string, int> constructor_index_;
  std::vector<int> field_id_base_;  // per constructor
  int total_fields_ = 0;
  std::map<std::string, int> type_ids_;

  void index();
};

// Parses the concrete syntax:
//   primitives: ident, string
//   multitoken: string
//   typename = Ctor1(type field, type* field, type? field) | Ctor2 | ...
// '#' starts a comment; productions may span lines.
AsdlGrammar parse_grammar(const std::string& text, const std::string& root_type);

// Empty iff all grammar invariants hold; one diagnostic per violation.
std::vector<Diagnostic> validate_grammar(const AsdlGrammar& g);

// Canonical source form; parse_grammar(render(g)) is structurally equal to g.
std::string render(const AsdlGrammar& g);

}  // namespace sempar::asdl
