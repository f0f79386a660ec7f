// Regenerates the shipped grammar files from the canonical in-code text.
#include <fstream>
#include <iostream>

#include "sempar/mr/grammars.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: dump_grammars <dir>\n";
    return 2;
  }
  std::string dir = argv[1];
  std::ofstream(dir + "/atis.asdl") << sempar::mr::atis_grammar_text();
  std::ofstream(dir + "/pylite.asdl") << sempar::mr::pylite_grammar_text();
  return 0;
}
