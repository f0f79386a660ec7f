#include "sempar/transition/action.hpp"

#include <sstream>
#include <stdexcept>

#include "sempar/util/text.hpp"

namespace sempar::transition {

std::string to_string(const asdl::AsdlGrammar& g, const Action& a) {
  switch (a.kind) {
    case Action::Kind::Apply:
      return "APPLY " + g.constructor(a.ctor).name;
    case Action::Kind::Reduce:
      return "REDUCE";
    case Action::Kind::GenToken:
      return "GEN " + util::escape_token(a.token);
  }
  return {};
}

std::string serialize_actions(const asdl::AsdlGrammar& g, const std::vector<Action>& actions) {
  std::string out;
  for (const Action& a : actions) {
    out += to_string(g, a);
    out += '\n';
  }
  return out;
}

std::vector<Action> parse_actions(const asdl::AsdlGrammar& g, const std::string& text) {
  std::vector<Action> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = util::trim(line);
    if (t.empty()) continue;
    if (t == "REDUCE") {
      out.push_back(Action::reduce());
    } else if (t.rfind("APPLY ", 0) == 0) {
      std::string name = util::trim(t.substr(6));
      int id = g.constructor_id(name);
      if (id < 0)
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": unknown constructor '" + name + "'");
      out.push_back(Action::apply(id));
    } else if (t.rfind("GEN ", 0) == 0) {
      out.push_back(Action::gen(util::unescape_token(t.substr(4))));
    } else {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": unrecognized action '" + t + "'");
    }
  }
  return out;
}

}  // namespace sempar::transition
