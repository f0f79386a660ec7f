#include "doctest.h"

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"

using namespace sempar::asdl;

namespace {

const char* kPyFragment = R"(
# tiny statement/expression grammar
primitives: identifier, string
multitoken: string

stmt = Expr(expr value)
expr = Call(expr func, expr* args, keyword* keywords)
     | Name(identifier id)
     | Str(string s)
keyword = keyword(identifier arg, expr value)
)";

AsdlGrammar fragment() { return parse_grammar(kPyFragment, "stmt"); }

}  // namespace

TEST_CASE("parse basic grammar shape") {
  AsdlGrammar g = fragment();
  CHECK(g.root_type() == "stmt");
  CHECK(g.composite_types() == std::vector<std::string>{"stmt", "expr", "keyword"});
  CHECK(g.primitive_types() == std::set<std::string>{"identifier", "string"});
  CHECK(g.is_multitoken("string"));
  CHECK_FALSE(g.is_multitoken("identifier"));

  auto expr_ctors = g.constructors_of("expr");
  REQUIRE(expr_ctors.size() == 3);
  CHECK(expr_ctors[0]->name == "Call");
  CHECK(expr_ctors[1]->name == "Name");
  CHECK(expr_ctors[2]->name == "Str");

  const Constructor& call = *expr_ctors[0];
  REQUIRE(call.fields.size() == 3);
  CHECK(call.fields[0] == Field{"func", "expr", Cardinality::Single});
  CHECK(call.fields[1] == Field{"args", "expr", Cardinality::Sequential});
  CHECK(call.fields[2] == Field{"keywords", "keyword", Cardinality::Sequential});
}

TEST_CASE("optional cardinality and nullary constructors") {
  AsdlGrammar g = parse_grammar(R"(
primitives: num
cmp_op = Equal | LessThan | GreaterThan
expr = Compare(cmp_op op, num? bound)
)",
                                "expr");
  auto ops = g.constructors_of("cmp_op");
  REQUIRE(ops.size() == 3);
  CHECK(ops[0]->fields.empty());
  const Constructor& cmp = *g.constructors_of("expr")[0];
  CHECK(cmp.fields[1].cardinality == Cardinality::Optional);
}

TEST_CASE("lookup errors") {
  AsdlGrammar g = fragment();
  CHECK_THROWS_AS(g.constructors_of("nope"), GrammarError);
  CHECK_THROWS_AS(g.constructors_of("identifier"), GrammarError);  // primitive
  CHECK(g.constructor_id("Missing") == -1);
}

TEST_CASE("parse errors carry positions") {
  // unresolved field type
  try {
    parse_grammar("stmt = Expr(expr value)", "stmt");
    FAIL("expected throw");
  } catch (const GrammarError& e) {
    CHECK(std::string(e.what()).find("expr") != std::string::npos);
    CHECK(e.line >= 1);
  }
  // duplicate constructor name across types
  CHECK_THROWS_AS(parse_grammar(R"(
primitives: t
a = Apply(t x)
b = Apply(t y)
)",
                                "a"),
                  GrammarError);
  // duplicate field name within a constructor
  CHECK_THROWS_AS(parse_grammar(R"(
primitives: t
a = C(t x, t x)
)",
                                "a"),
                  GrammarError);
  // primitive also declared as a production
  CHECK_THROWS_AS(parse_grammar(R"(
primitives: t
t = C
)",
                                "t"),
                  GrammarError);
  // multitoken names a non-primitive
  CHECK_THROWS_AS(parse_grammar(R"(
primitives: t
multitoken: u
a = C(t x)
)",
                                "a"),
                  GrammarError);
  // root type missing entirely
  CHECK_THROWS_AS(parse_grammar(R"(
primitives: t
a = C(t x)
)",
                                "zzz"),
                  GrammarError);
}

TEST_CASE("validate_grammar reports one diagnostic per violation") {
  // duplicate constructor names, assembled without parser enforcement
  AsdlGrammar dup = AsdlGrammar::build(
      "a",
      {Constructor{"Apply", "a", {}}, Constructor{"Apply", "b", {}}},
      {"t"});
  auto diags = validate_grammar(dup);
  CHECK(diags.size() == 1);

  // unresolved field type
  AsdlGrammar unresolved = AsdlGrammar::build(
      "a", {Constructor{"C", "a", {Field{"x", "ghost", Cardinality::Single}}}}, {"t"});
  CHECK(validate_grammar(unresolved).size() == 1);

  // parser output is always clean
  CHECK(validate_grammar(fragment()).empty());
}

TEST_CASE("render round trip is stable") {
  AsdlGrammar g = fragment();
  std::string first = render(g);
  AsdlGrammar g2 = parse_grammar(first, g.root_type());
  CHECK(render(g2) == first);
  CHECK(g2.constructors() == g.constructors());
  CHECK(g2.primitive_types() == g.primitive_types());
}

TEST_CASE("field ids are dense and start after the root id") {
  AsdlGrammar g = fragment();
  CHECK(AsdlGrammar::kRootFieldId == 0);
  int call = g.constructor_id("Call");
  int name = g.constructor_id("Name");
  std::set<int> seen{AsdlGrammar::kRootFieldId};
  for (int c : {g.constructor_id("Expr"), call, name, g.constructor_id("Str"),
                g.constructor_id("keyword")}) {
    for (size_t i = 0; i < g.constructor(c).fields.size(); ++i) {
      int id = g.field_id(c, static_cast<int>(i));
      CHECK(id > 0);
      CHECK(seen.insert(id).second);  // unique
    }
  }
  CHECK(static_cast<int>(seen.size()) == g.field_count());
}

TEST_CASE("conforms accepts a good tree and pinpoints bad ones") {
  AsdlGrammar g = fragment();
  int call = g.constructor_id("Call");
  int name = g.constructor_id("Name");
  int expr_stmt = g.constructor_id("Expr");

  // sorted(x)
  Ast ast;
  int tok_sorted = ast.add_primitive({"sorted"});
  int n_name1 = ast.add_composite(name, 1);
  ast.node(n_name1).children[0] = {tok_sorted};
  int tok_x = ast.add_primitive({"x"});
  int n_name2 = ast.add_composite(name, 1);
  ast.node(n_name2).children[0] = {tok_x};
  int n_call = ast.add_composite(call, 3);
  ast.node(n_call).children[0] = {n_name1};
  ast.node(n_call).children[1] = {n_name2};
  int n_root = ast.add_composite(expr_stmt, 1);
  ast.node(n_root).children[0] = {n_call};
  ast.root = n_root;

  std::string why;
  CHECK(conforms(g, ast, &why));

  // Single-cardinality func left empty
  Ast bad = ast;
  bad.node(n_call).children[0].clear();
  CHECK_FALSE(conforms(g, bad, &why));
  CHECK(why.find("func") != std::string::npos);

  // multi-token value under a single-token primitive
  Ast multi = ast;
  multi.node(tok_sorted).tokens = {"a", "b"};
  CHECK_FALSE(conforms(g, multi, &why));

  // structural equality ignores node ids
  Ast reordered;
  int r_root = reordered.add_composite(expr_stmt, 1);
  int r_call = reordered.add_composite(call, 3);
  int r_n1 = reordered.add_composite(name, 1);
  int r_t1 = reordered.add_primitive({"sorted"});
  int r_n2 = reordered.add_composite(name, 1);
  int r_t2 = reordered.add_primitive({"x"});
  reordered.node(r_n1).children[0] = {r_t1};
  reordered.node(r_n2).children[0] = {r_t2};
  reordered.node(r_call).children[0] = {r_n1};
  reordered.node(r_call).children[1] = {r_n2};
  reordered.node(r_root).children[0] = {r_call};
  reordered.root = r_root;
  CHECK(ast_equal(ast, reordered));

  reordered.node(r_t2).tokens = {"y"};
  CHECK_FALSE(ast_equal(ast, reordered));
}
