#include "sempar/transition/oracle.hpp"

#include <limits>
#include <stdexcept>

namespace sempar::transition {

using asdl::Cardinality;

TokenCandidates token_pool(std::map<std::string, std::vector<std::string>> pools) {
  return [pools = std::move(pools)](const std::string& type_name) -> std::vector<std::string> {
    auto it = pools.find(type_name);
    if (it == pools.end()) return {};
    return it->second;
  };
}

namespace {

void emit_value(const asdl::AsdlGrammar& g, const asdl::Ast& ast, const std::string& type_name,
                int node_id, std::vector<Action>& out) {
  const asdl::AstNode& node = ast.node(node_id);
  if (g.is_primitive(type_name)) {
    if (g.is_multitoken(type_name)) {
      for (const std::string& tok : node.tokens) out.push_back(Action::gen(tok));
      out.push_back(Action::gen(kFieldTerminator));
    } else {
      out.push_back(Action::gen(node.tokens.at(0)));
    }
    return;
  }
  const asdl::Constructor& c = g.constructor(node.constructor_id);
  out.push_back(Action::apply(node.constructor_id));
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    const asdl::Field& f = c.fields[i];
    for (int child : node.children[i]) emit_value(g, ast, f.type_name, child, out);
    bool needs_reduce = f.cardinality == Cardinality::Sequential ||
                        (f.cardinality == Cardinality::Optional && node.children[i].empty());
    if (needs_reduce) out.push_back(Action::reduce());
  }
}

}  // namespace

std::vector<Action> ast_to_actions(const asdl::AsdlGrammar& g, const asdl::Ast& ast) {
  std::string why;
  if (!asdl::conforms(g, ast, &why))
    throw std::runtime_error("cannot derive a nonconforming tree: " + why);
  std::vector<Action> out;
  emit_value(g, ast, g.root_type(), ast.root, out);
  return out;
}

asdl::Ast actions_to_ast(const asdl::AsdlGrammar& g, const std::vector<Action>& actions) {
  DerivationState st = DerivationState::initial(g);
  for (const Action& a : actions) st.apply(a);  // IllegalActionError carries the step
  if (!st.complete())
    throw std::runtime_error("action sequence ends with " + std::to_string(st.depth()) +
                             " unfilled fields");
  return st.ast();
}

std::map<std::string, int> min_completion_depth(const asdl::AsdlGrammar& g) {
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::map<std::string, int> depth;
  for (const std::string& t : g.primitive_types()) depth[t] = 0;
  for (const std::string& t : g.composite_types()) depth[t] = kInf;

  auto ctor_cost = [&](const asdl::Constructor& c) {
    int worst = 0;
    for (const asdl::Field& f : c.fields) {
      if (f.cardinality != Cardinality::Single) continue;  // closable with Reduce
      worst = std::max(worst, depth.at(f.type_name));
    }
    return worst >= kInf ? kInf : 1 + worst;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::string& t : g.composite_types()) {
      int best = depth.at(t);
      for (const asdl::Constructor* c : g.constructors_of(t)) best = std::min(best, ctor_cost(*c));
      if (best < depth.at(t)) {
        depth[t] = best;
        changed = true;
      }
    }
  }
  for (auto& [t, d] : depth)
    if (d >= kInf) d = -1;
  return depth;
}

namespace {

// Minimum ACTIONS to complete one value of each type: one GenToken for a
// single-token primitive (two for a multitoken one); for composites
// 1 (Apply) + Σ Single-field costs + one Reduce per closable field, minimized
// over constructors.  Steering by this cost strictly shrinks the total
// remaining work each step, so a steered rollout always terminates.
std::map<std::string, long> min_completion_steps(const asdl::AsdlGrammar& g) {
  constexpr long kInf = std::numeric_limits<long>::max() / 4;
  std::map<std::string, long> steps;
  for (const std::string& t : g.primitive_types()) steps[t] = g.is_multitoken(t) ? 2 : 1;
  for (const std::string& t : g.composite_types()) steps[t] = kInf;

  auto ctor_cost = [&](const asdl::Constructor& c) {
    long total = 1;
    for (const asdl::Field& f : c.fields) {
      total += f.cardinality == Cardinality::Single ? steps.at(f.type_name) : 1;
      if (total >= kInf) return kInf;
    }
    return total;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::string& t : g.composite_types()) {
      long best = steps.at(t);
      for (const asdl::Constructor* c : g.constructors_of(t)) best = std::min(best, ctor_cost(*c));
      if (best < steps.at(t)) {
        steps[t] = best;
        changed = true;
      }
    }
  }
  return steps;
}

}  // namespace

asdl::Ast random_rollout(const asdl::AsdlGrammar& g, util::Rng& rng, const TokenCandidates& tokens,
                         const RolloutOptions& opt) {
  std::map<std::string, int> depth = min_completion_depth(g);
  for (const auto& [t, d] : depth)
    if (d < 0) throw std::runtime_error("type '" + t + "' can never complete; rollout would hang");
  std::map<std::string, long> steps = min_completion_steps(g);

  DerivationState st = DerivationState::initial(g);
  while (!st.complete()) {
    FrontierInfo f = st.frontier();
    ActionTemplates legal = st.valid_actions();
    // Sequential fields grow width without growing the stack, so a pure
    // depth cap cannot bound the walk; the step cap closes that hole.
    bool deep = st.depth() > opt.depth_cap ||
                static_cast<int>(st.history().size()) >= opt.step_cap;

    if (f.mid_value) {
      bool must_close = deep || f.pending_tokens >= opt.multitoken_cap;
      std::vector<std::string> pool = tokens(f.type_name);
      if (must_close || pool.empty() || rng.below(2) == 0) {
        st.apply(Action::gen(kFieldTerminator));
      } else {
        st.apply(Action::gen(pool[rng.below(pool.size())]));
      }
      continue;
    }

    if (deep) {
      // Steer home: close what can close, else take the cheapest constructor.
      if (legal.reduce) {
        st.apply(Action::reduce());
      } else if (legal.gen_token) {
        std::vector<std::string> pool = tokens(f.type_name);
        if (pool.empty())
          throw std::runtime_error("no token candidates for primitive type '" + f.type_name + "'");
        st.apply(Action::gen(pool[rng.below(pool.size())]));
        if (g.is_multitoken(f.type_name)) st.apply(Action::gen(kFieldTerminator));
      } else {
        int best = legal.apply_ctors.front();
        auto cost = [&](int id) {
          long total = 0;
          for (const asdl::Field& fd : g.constructor(id).fields)
            if (fd.cardinality == Cardinality::Single) total += steps.at(fd.type_name);
          return total;
        };
        for (int id : legal.apply_ctors)
          if (cost(id) < cost(best)) best = id;
        st.apply(Action::apply(best));
      }
      continue;
    }

    std::vector<Action> options;
    for (int id : legal.apply_ctors) options.push_back(Action::apply(id));
    if (legal.gen_token)
      for (const std::string& tok : tokens(f.type_name)) options.push_back(Action::gen(tok));
    if (legal.reduce) options.push_back(Action::reduce());
    if (options.empty())
      throw std::runtime_error("no expansion available for primitive type '" + f.type_name +
                               "' (empty token pool)");
    st.apply(options[rng.below(options.size())]);
  }
  return st.ast();
}

namespace {

constexpr int kEnumStepCap = 512;        // per-derivation guard against runaway grammars
constexpr int kEnumMultitokenCap = 3;    // bound multitoken values during enumeration

void enumerate_dfs(const DerivationState& st, const TokenCandidates& tokens, std::size_t limit,
                   std::vector<asdl::Ast>& out) {
  if (st.complete()) {
    if (out.size() >= limit)
      throw std::runtime_error("enumeration exceeded limit of " + std::to_string(limit));
    out.push_back(st.ast());
    return;
  }
  if (st.history().size() > kEnumStepCap)
    throw std::runtime_error("enumeration path exceeded " + std::to_string(kEnumStepCap) +
                             " steps; grammar looks unbounded");
  FrontierInfo f = st.frontier();
  ActionTemplates legal = st.valid_actions();

  std::vector<Action> options;
  for (int id : legal.apply_ctors) options.push_back(Action::apply(id));
  if (legal.gen_token && (!f.mid_value || f.pending_tokens < kEnumMultitokenCap))
    for (const std::string& tok : tokens(f.type_name)) options.push_back(Action::gen(tok));
  if (legal.gen_terminator && f.mid_value) options.push_back(Action::gen(kFieldTerminator));
  if (legal.reduce) options.push_back(Action::reduce());

  for (const Action& a : options) {
    DerivationState next = st;
    next.apply(a);
    enumerate_dfs(next, tokens, limit, out);
  }
}

}  // namespace

std::vector<asdl::Ast> enumerate_asts(const asdl::AsdlGrammar& g, const TokenCandidates& tokens,
                                      std::size_t limit) {
  std::vector<asdl::Ast> out;
  enumerate_dfs(DerivationState::initial(g), tokens, limit, out);
  return out;
}

}  // namespace sempar::transition
