#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/transition/action.hpp"

namespace sempar::transition {

// Which actions are legal at the current frontier.  GenToken legality is split
// into "any ordinary token" and "the terminator" because only multitoken
// fields accept the latter.
struct ActionTemplates {
  std::vector<int> apply_ctors;  // legal constructor ids, grammar order
  bool reduce = false;
  bool gen_token = false;       // any token other than the terminator
  bool gen_terminator = false;  // the multitoken terminator

  bool allows(const Action& a) const;
  bool empty() const {
    return apply_ctors.empty() && !reduce && !gen_token && !gen_terminator;
  }
};

// Snapshot of the field currently awaiting a value.
struct FrontierInfo {
  std::string type_name;
  std::string field_name;
  asdl::Cardinality cardinality = asdl::Cardinality::Single;
  int field_id = 0;        // grammar-wide field id (0 = root pseudo-field)
  int type_id = -1;
  int parent_node = -1;    // AST node id, -1 at the root
  int parent_ctor = -1;    // constructor id of the parent, -1 at the root
  int parent_step = -1;    // history index of the Apply that created the field
  int filled = 0;          // values already attached (Sequential counts up)
  bool mid_value = false;  // inside a multitoken value
  int pending_tokens = 0;  // tokens buffered so far in that value

  // compact human-readable form, e.g. "expr* args" or "stmt root"
  std::string signature() const;
};

class IllegalActionError : public std::runtime_error {
 public:
  IllegalActionError(std::string msg, int step) : std::runtime_error(std::move(msg)), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// One partially built AST plus the stack of fields still awaiting values.
// Copyable by value so search can branch cheaply.
class DerivationState {
 public:
  static DerivationState initial(const asdl::AsdlGrammar& g);

  const asdl::AsdlGrammar& grammar() const { return *grammar_; }
  bool complete() const { return complete_; }
  const asdl::Ast& ast() const { return ast_; }
  const std::vector<Action>& history() const { return history_; }
  int depth() const { return static_cast<int>(stack_.size()); }

  // Frontier of the topmost pending field; only valid while !complete().
  FrontierInfo frontier() const;
  ActionTemplates valid_actions() const;

  // Applies a legal action in place; throws IllegalActionError otherwise.
  void apply(const Action& a);

  // Like apply but reports legality instead of throwing.
  bool try_apply(const Action& a);

 private:
  struct StackEntry {
    int parent_node;  // -1 for the root slot
    int field_index;  // index into the parent constructor's fields, -1 for root
    int parent_step;  // history index of the Apply that pushed this entry
    int filled = 0;
    std::vector<std::string> pending;  // multitoken buffer
    bool mid_value = false;
  };

  const asdl::Field& field_of(const StackEntry& e) const;
  void attach(StackEntry& e, int node_id);

  const asdl::AsdlGrammar* grammar_ = nullptr;
  asdl::Field root_field_;  // pseudo-field the root value fills
  asdl::Ast ast_;
  std::vector<StackEntry> stack_;
  std::vector<Action> history_;
  bool complete_ = false;
};

}  // namespace sempar::transition
