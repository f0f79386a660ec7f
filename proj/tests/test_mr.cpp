#include "doctest.h"

#include <fstream>
#include <sstream>

#include "sempar/mr/grammars.hpp"
#include "sempar/mr/lambda_form.hpp"
#include "sempar/mr/linear.hpp"
#include "sempar/mr/pylite.hpp"
#include "sempar/transition/oracle.hpp"
#include "sempar/util/rng.hpp"

using namespace sempar;
using namespace sempar::mr;

namespace {

const asdl::AsdlGrammar& atis() {
  static asdl::AsdlGrammar g = asdl::parse_grammar(atis_grammar_text(), kAtisRoot);
  return g;
}
const asdl::AsdlGrammar& pylite() {
  static asdl::AsdlGrammar g = asdl::parse_grammar(pylite_grammar_text(), kPyliteRoot);
  return g;
}

}  // namespace

TEST_CASE("lambda grammar shape") {
  const asdl::AsdlGrammar& g = atis();
  CHECK(g.constructors_of("expr").size() == 17);
  auto ops = g.constructors_of("cmp_op");
  REQUIRE(ops.size() == 3);
  CHECK(ops[0]->name == "Equal");
  CHECK(ops[1]->name == "LessThan");
  CHECK(ops[2]->name == "GreaterThan");
  CHECK(g.primitive_types() == std::set<std::string>{"var", "ent", "num", "pred", "var_type"});
  CHECK(g.multitoken_primitives().empty());
}

TEST_CASE("lambda parse/print round trip on corpus-style forms") {
  const asdl::AsdlGrammar& g = atis();
  const std::vector<std::string> forms = {
      "(lambda $0 e (and (flight $0) (from $0 ci0) (to $0 ci1) (weekday $0)))",
      "(argmax $0 (and (flight $0) (meal $0 lunch:me) (from $0 ci0) (to $0 ci1)) "
      "(departure_time $0))",
      "(min $0 (exists $1 (and (from $1 ci0) (to $1 ci1) (day_number $1 dn0) (month $1 mn0) "
      "(round_trip $1) (= (fare $1) $0))))",
      "(lambda $0 e (exists $1 (and (rental_car $1) (to_city $1 ci0) (= (ground_fare $1) $0))))",
      "(count $0 (and (flight $0) (oneway $0)))",
      "(lambda $0 e (not (flight $0)))",
      "(or (flight $0) (train $0))",
      "(sum $0 (flight $0) (capacity $0))",
      "(the $0 (airline $0))",
      "(max $0 (fare $0))",
      "(argmin $0 (flight $0) (fare $0))",
      "(> (fare $0) 100)",
      "(< (fare $0) 300.5)",
      "ci0",
  };
  for (const std::string& s : forms) {
    CAPTURE(s);
    asdl::Ast z = lf_parse(g, s);
    CHECK(asdl::conforms(g, z));
    CHECK(lf_print(g, z) == s);
  }
}

TEST_CASE("lambda parse classifies leaves and rejects bad arity") {
  const asdl::AsdlGrammar& g = atis();

  asdl::Ast ent = lf_parse(g, "ci0");
  CHECK(ent.node(ent.root).constructor_id == g.constructor_id("Entity"));

  asdl::Ast var = lf_parse(g, "$3");
  CHECK(var.node(var.root).constructor_id == g.constructor_id("Variable"));

  asdl::Ast num = lf_parse(g, "1200");
  CHECK(num.node(num.root).constructor_id == g.constructor_id("Number"));

  // typed slot entities keep their colon
  asdl::Ast meal = lf_parse(g, "(meal $0 lunch:me)");
  const asdl::AstNode& apply = meal.node(meal.root);
  CHECK(meal.node(apply.children[1][1]).constructor_id == g.constructor_id("Entity"));

  CHECK_THROWS_AS(lf_parse(g, "(lambda $0)"), MrSyntaxError);
  CHECK_THROWS_AS(lf_parse(g, "(lambda $0 e"), MrSyntaxError);      // unbalanced
  CHECK_THROWS_AS(lf_parse(g, "(= (fare $0))"), MrSyntaxError);     // compare needs two
  CHECK_THROWS_AS(lf_parse(g, "(exists x (flight $0))"), MrSyntaxError);  // binder wants $-var
  CHECK_THROWS_AS(lf_parse(g, "flight $0"), MrSyntaxError);         // trailing tokens
  CHECK_THROWS_AS(lf_parse(g, ""), MrSyntaxError);
}

TEST_CASE("pylite round trips the documented examples") {
  const asdl::AsdlGrammar& g = pylite();
  const std::vector<std::string> lines = {
      "sorted(my_list, reverse=True)",
      "f = os.path.join(p, cmd)",
      "p = path.join(p, cmd)",
      "child_loggers.append(existing[i])",
      "child_loggers.append(existing[existing])",
      "primary_keys = pks.split(',')",
      "primary_keys = pks.split + ','",
      "elif isinstance(target, six.string_types): pass",
      "for k, v in unk.items(): pass",
      "return cursor.fetchone()[0]",
      "sys.stderr.write(_STR_)",
      "opts = getattr(self, _STR_, None)",
      "if self.errors: pass",
      "return",
      "a = b = c",
      "a, b = f(x)",
      "x[0] = y[1][2]",
      "d = a + b * c - e / f",
      "t = a, b",
      "s = 'hello world'",
      "n = 42 + 3.5",
  };
  for (const std::string& line : lines) {
    CAPTURE(line);
    asdl::Ast z = pylite_parse(g, line);
    CHECK(asdl::conforms(g, z));
    CHECK(pylite_print(g, z) == line);
  }
}

TEST_CASE("pylite builds the documented tree for the sorted example") {
  const asdl::AsdlGrammar& g = pylite();
  asdl::Ast z = pylite_parse(g, "sorted(my_list, reverse=True)");
  const asdl::AstNode& root = z.node(z.root);
  CHECK(root.constructor_id == g.constructor_id("Expr"));
  const asdl::AstNode& call = z.node(root.children[0][0]);
  REQUIRE(call.constructor_id == g.constructor_id("Call"));
  const asdl::AstNode& func = z.node(call.children[0][0]);
  CHECK(func.constructor_id == g.constructor_id("Name"));
  CHECK(z.node(func.children[0][0]).tokens == std::vector<std::string>{"sorted"});
  REQUIRE(call.children[1].size() == 1);
  REQUIRE(call.children[2].size() == 1);
  const asdl::AstNode& kw = z.node(call.children[2][0]);
  CHECK(z.node(kw.children[0][0]).tokens == std::vector<std::string>{"reverse"});
  const asdl::AstNode& val = z.node(kw.children[1][0]);
  CHECK(val.constructor_id == g.constructor_id("Name"));
  CHECK(z.node(val.children[0][0]).tokens == std::vector<std::string>{"True"});
}

TEST_CASE("pylite rejects out-of-subset constructs") {
  const asdl::AsdlGrammar& g = pylite();
  CHECK_THROWS_AS(pylite_parse(g, "class A: pass"), MrSyntaxError);  // 'class' parses as Name,
                                                                     // then 'A' is unexpected
  CHECK_THROWS_AS(pylite_parse(g, "x = {}"), MrSyntaxError);
  CHECK_THROWS_AS(pylite_parse(g, "f(a=1, b)"), MrSyntaxError);  // positional after keyword
  CHECK_THROWS_AS(pylite_parse(g, "x = 'unterminated"), MrSyntaxError);
  CHECK_THROWS_AS(pylite_parse(g, "if x: y = 1"), MrSyntaxError);  // body must be pass
  CHECK_THROWS_AS(pylite_parse(g, ""), MrSyntaxError);
  CHECK_THROWS_AS(pylite_parse(g, "x ="), MrSyntaxError);
}

TEST_CASE("tokenizers") {
  CHECK(pylite_tokenize("sorted(my_list, reverse=True)") ==
        std::vector<std::string>{"sorted", "(", "my_list", ",", "reverse", "=", "True", ")"});
  CHECK(pylite_tokenize("x = 'a b' + 1.5") ==
        std::vector<std::string>{"x", "=", "'a b'", "+", "1.5"});
  CHECK(lf_tokenize("(lambda $0 e (and (flight $0)))").size() == 12);
  CHECK(lf_tokenize("  ci0 ") == std::vector<std::string>{"ci0"});
}

TEST_CASE("linearize and delinearize are inverse on both kinds") {
  const asdl::AsdlGrammar& ga = atis();
  asdl::Ast za =
      lf_parse(ga, "(lambda $0 e (and (flight $0) (from $0 ci0) (to $0 ci1) (weekday $0)))");
  LinearMR ma = linearize(ga, za, MrKind::Lambda);
  CHECK(ma.tokens[0] == "(");
  CHECK(ma.tokens[1] == "lambda");
  CHECK(ma.tokens[2] == "$0");
  CHECK(asdl::ast_equal(delinearize(ga, ma), za));
  CHECK(syntax_check(ga, ma));

  const asdl::AsdlGrammar& gp = pylite();
  asdl::Ast zp = pylite_parse(gp, "sorted(my_list, reverse=True)");
  LinearMR mp = linearize(gp, zp, MrKind::PyLite);
  CHECK(mp.tokens ==
        std::vector<std::string>{"sorted", "(", "my_list", ",", "reverse", "=", "True", ")"});
  CHECK(asdl::ast_equal(delinearize(gp, mp), zp));

  // single-atom MR is a single token
  CHECK(linearize(ga, lf_parse(ga, "ci0"), MrKind::Lambda).tokens ==
        std::vector<std::string>{"ci0"});
}

TEST_CASE("syntax_check accepts valid-but-wrong code and rejects broken streams") {
  const asdl::AsdlGrammar& gp = pylite();
  LinearMR wrong{pylite_tokenize("primary_keys = pks.split + ','"), MrKind::PyLite};
  CHECK(syntax_check(gp, wrong));

  const asdl::AsdlGrammar& ga = atis();
  LinearMR unbalanced{{"(", "lambda", "$0"}, MrKind::Lambda};
  CHECK_FALSE(syntax_check(ga, unbalanced));
  LinearMR empty{{}, MrKind::Lambda};
  CHECK_FALSE(syntax_check(ga, empty));
}

TEST_CASE("generic surface round trips arbitrary rollouts of any grammar") {
  asdl::AsdlGrammar g = asdl::parse_grammar(R"(
primitives: word, blurb
multitoken: blurb
doc = Doc(sec* sections)
sec = Para(blurb text, word? tag) | Rule(word lhs, word rhs)
)",
                                            "doc");
  auto tokens = transition::token_pool({{"word", {"a", "b"}}, {"blurb", {"x", "y"}}});
  util::Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    asdl::Ast z = transition::random_rollout(g, rng, tokens);
    LinearMR m = linearize(g, z, MrKind::Generic);
    CHECK(asdl::ast_equal(delinearize(g, m), z));
    CHECK(syntax_check(g, m));
  }
  LinearMR junk{{"(", "Doc", "["}, MrKind::Generic};
  CHECK_FALSE(syntax_check(g, junk));
}

TEST_CASE("linearization of every conforming AST passes syntax_check (lambda + pylite)") {
  const asdl::AsdlGrammar& ga = atis();
  auto tok_a = transition::token_pool({{"var", {"$0", "$1"}},
                                       {"ent", {"ci0", "ci1", "lunch:me"}},
                                       {"num", {"2", "100"}},
                                       {"pred", {"flight", "from", "to", "fare"}},
                                       {"var_type", {"e", "i"}}});
  util::Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    asdl::Ast z = transition::random_rollout(ga, rng, tok_a);
    LinearMR m = linearize(ga, z, MrKind::Lambda);
    CHECK(syntax_check(ga, m));
    CHECK(asdl::ast_equal(delinearize(ga, m), z));
  }

  // The pylite grammar over-generates: a few shapes (zero-target Assign,
  // sub-pair Tuple) have no surface form and the printer refuses them.
  // Every printable rollout must round trip.
  const asdl::AsdlGrammar& gp = pylite();
  auto tok_p = transition::token_pool({{"identifier", {"x", "foo", "_STR_"}},
                                       {"num", {"0", "1.5"}},
                                       {"string", {"a", "b"}}});
  int printable = 0;
  for (int i = 0; i < 300; ++i) {
    asdl::Ast z = transition::random_rollout(gp, rng, tok_p);
    LinearMR m;
    try {
      m = linearize(gp, z, MrKind::PyLite);
    } catch (const MrSyntaxError&) {
      continue;
    }
    ++printable;
    CAPTURE(surface(m));
    CHECK(syntax_check(gp, m));
    CHECK(asdl::ast_equal(delinearize(gp, m), z));
  }
  CHECK(printable > 100);
}

TEST_CASE("printer refuses trees with no surface form") {
  const asdl::AsdlGrammar& g = pylite();
  asdl::Ast z;
  int name = z.add_composite(g.constructor_id("Name"), 1);
  z.node(name).children[0] = {z.add_primitive({"x"})};
  int assign = z.add_composite(g.constructor_id("Assign"), 2);
  z.node(assign).children[1] = {name};  // no targets
  z.root = assign;
  REQUIRE(asdl::conforms(g, z));
  CHECK_THROWS_AS(pylite_print(g, z), MrSyntaxError);
}

TEST_CASE("shipped grammar files match the canonical text") {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  CHECK(slurp(std::string(SEMPAR_DATA_DIR) + "/grammars/atis.asdl") == atis_grammar_text());
  CHECK(slurp(std::string(SEMPAR_DATA_DIR) + "/grammars/pylite.asdl") == pylite_grammar_text());
}
