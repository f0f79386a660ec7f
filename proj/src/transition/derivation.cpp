#include "sempar/transition/derivation.hpp"

#include <algorithm>

namespace sempar::transition {

using asdl::Cardinality;

bool ActionTemplates::allows(const Action& a) const {
  switch (a.kind) {
    case Action::Kind::Apply:
      return std::find(apply_ctors.begin(), apply_ctors.end(), a.ctor) != apply_ctors.end();
    case Action::Kind::Reduce:
      return reduce;
    case Action::Kind::GenToken:
      return a.token == kFieldTerminator ? gen_terminator : gen_token;
  }
  return false;
}

std::string FrontierInfo::signature() const {
  std::string s = type_name;
  if (cardinality == Cardinality::Optional) s += '?';
  if (cardinality == Cardinality::Sequential) s += '*';
  s += ' ';
  s += field_name;
  return s;
}

DerivationState DerivationState::initial(const asdl::AsdlGrammar& g) {
  DerivationState st;
  st.grammar_ = &g;
  // The root behaves as a single-cardinality pseudo-field named "root".
  st.root_field_ = {"root", g.root_type(), Cardinality::Single};
  st.stack_.push_back({/*parent_node=*/-1, /*field_index=*/-1, /*parent_step=*/-1});
  return st;
}

const asdl::Field& DerivationState::field_of(const StackEntry& e) const {
  if (e.parent_node < 0) return root_field_;
  int ctor = ast_.node(e.parent_node).constructor_id;
  return grammar_->constructor(ctor).fields[e.field_index];
}

FrontierInfo DerivationState::frontier() const {
  if (complete_) throw std::logic_error("frontier() on a complete derivation");
  const StackEntry& e = stack_.back();
  const asdl::Field& f = field_of(e);
  FrontierInfo info;
  info.type_name = f.type_name;
  info.field_name = f.name;
  info.cardinality = f.cardinality;
  info.type_id = grammar_->type_id(f.type_name);
  info.parent_node = e.parent_node;
  info.parent_step = e.parent_step;
  info.filled = e.filled;
  info.mid_value = e.mid_value;
  info.pending_tokens = static_cast<int>(e.pending.size());
  if (e.parent_node < 0) {
    info.field_id = asdl::AsdlGrammar::kRootFieldId;
    info.parent_ctor = -1;
  } else {
    info.parent_ctor = ast_.node(e.parent_node).constructor_id;
    info.field_id = grammar_->field_id(info.parent_ctor, e.field_index);
  }
  return info;
}

ActionTemplates DerivationState::valid_actions() const {
  ActionTemplates t;
  if (complete_) return t;
  const StackEntry& e = stack_.back();
  const asdl::Field& f = field_of(e);
  if (e.mid_value) {
    // Inside a multitoken value only tokens may follow.
    t.gen_token = true;
    t.gen_terminator = true;
    return t;
  }
  bool closable = (f.cardinality == Cardinality::Optional && e.filled == 0) ||
                  f.cardinality == Cardinality::Sequential;
  t.reduce = closable;
  if (grammar_->is_primitive(f.type_name)) {
    t.gen_token = true;
    t.gen_terminator = grammar_->is_multitoken(f.type_name);
  } else {
    t.apply_ctors = grammar_->constructor_ids_of(f.type_name);
  }
  return t;
}

void DerivationState::attach(StackEntry& e, int node_id) {
  if (e.parent_node < 0) {
    ast_.root = node_id;
  } else {
    ast_.nodes[e.parent_node].children[e.field_index].push_back(node_id);
  }
}

void DerivationState::apply(const Action& a) {
  if (complete_)
    throw IllegalActionError("action after derivation completed",
                             static_cast<int>(history_.size()));
  ActionTemplates legal = valid_actions();
  if (!legal.allows(a)) {
    FrontierInfo f = frontier();
    throw IllegalActionError("illegal action " + to_string(*grammar_, a) + " at frontier [" +
                                 f.signature() + "]",
                             static_cast<int>(history_.size()));
  }
  int step = static_cast<int>(history_.size());
  history_.push_back(a);

  StackEntry& e = stack_.back();
  const asdl::Field& f = field_of(e);
  Cardinality card = f.cardinality;

  auto settle = [&] {
    // A value was attached: Sequential frontiers persist, others pop.
    if (card == Cardinality::Sequential) {
      ++stack_.back().filled;
    } else {
      stack_.pop_back();
    }
  };

  switch (a.kind) {
    case Action::Kind::Apply: {
      const asdl::Constructor& c = grammar_->constructor(a.ctor);
      int node = ast_.add_composite(a.ctor, c.fields.size());
      attach(e, node);
      settle();
      for (int i = static_cast<int>(c.fields.size()) - 1; i >= 0; --i)
        stack_.push_back({node, i, step});
      break;
    }
    case Action::Kind::Reduce:
      stack_.pop_back();
      break;
    case Action::Kind::GenToken: {
      if (grammar_->is_multitoken(f.type_name)) {
        if (a.token == kFieldTerminator) {
          int node = ast_.add_primitive(std::move(e.pending));
          e.pending.clear();
          e.mid_value = false;
          attach(e, node);
          settle();
        } else {
          e.pending.push_back(a.token);
          e.mid_value = true;
        }
      } else {
        int node = ast_.add_primitive({a.token});
        attach(e, node);
        settle();
      }
      break;
    }
  }
  if (stack_.empty()) complete_ = true;
}

bool DerivationState::try_apply(const Action& a) {
  if (complete_ || !valid_actions().allows(a)) return false;
  apply(a);
  return true;
}

}  // namespace sempar::transition
