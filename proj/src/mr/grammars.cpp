#include "sempar/mr/grammars.hpp"

namespace sempar::mr {

const std::string& atis_grammar_text() {
  static const std::string text = R"(# lambda-calculus logical forms
primitives: var, ent, num, pred, var_type

expr = Variable(var variable)
     | Entity(ent entity)
     | Number(num number)
     | Apply(pred predicate, expr* arguments)
     | Argmax(var variable, expr domain, expr body)
     | Argmin(var variable, expr domain, expr body)
     | Count(var variable, expr body)
     | Exists(var variable, expr body)
     | Lambda(var variable, var_type type, expr body)
     | Max(var variable, expr body)
     | Min(var variable, expr body)
     | Sum(var variable, expr domain, expr body)
     | The(var variable, expr body)
     | Not(expr argument)
     | And(expr* arguments)
     | Or(expr* arguments)
     | Compare(cmp_op op, expr left, expr right)

cmp_op = Equal | LessThan | GreaterThan
)";
  return text;
}

const std::string& pylite_grammar_text() {
  static const std::string text = R"(# one-line restricted-Python statements
primitives: identifier, string, num
multitoken: string

stmt = Expr(expr value)
     | Assign(expr* targets, expr value)
     | Return(expr? value)
     | If(expr test)
     | Elif(expr test)
     | For(expr target, expr iter)
expr = Call(expr func, expr* args, keyword* keywords)
     | Attribute(expr value, identifier attr)
     | Subscript(expr value, expr index)
     | Name(identifier id)
     | Tuple(expr* elts)
     | Str(string s)
     | Num(num n)
     | BinOp(expr left, operator op, expr right)
operator = Add | Sub | Mult | Div
keyword = keyword(identifier arg, expr value)
)";
  return text;
}

}  // namespace sempar::mr
