#pragma once

#include <string>

namespace sempar::mr {

// Canonical grammar sources; the files under data/grammars/ carry the same
// text and a test keeps them in sync.
const std::string& atis_grammar_text();
const std::string& pylite_grammar_text();

inline const char* kAtisRoot = "expr";
inline const char* kPyliteRoot = "stmt";

}  // namespace sempar::mr
