#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sempar/asdl/ast.hpp"
#include "sempar/asdl/grammar.hpp"
#include "sempar/mr/linear.hpp"

namespace sempar::data {

// Which corpus family a dataset belongs to; fixes the MR surface form.
enum class DatasetKind { Lambda, PyLite, Toy };

const char* to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);
mr::MrKind to_mr_kind(DatasetKind k);

struct LabeledExample {
  std::vector<std::string> x;  // utterance tokens
  asdl::Ast z;                 // parsed MR
};

struct LineError {
  int line = 0;  // 1-based
  std::string message;
};

struct Dataset {
  DatasetKind kind = DatasetKind::Toy;
  std::vector<LabeledExample> labeled;
  std::vector<std::vector<std::string>> unlabeled;  // utterance-only lines
  std::vector<LineError> errors;                    // only populated when !strict
};

// TSV, one example per line: "utterance<TAB>mr" (labeled) or "utterance"
// (unlabeled).  Utterances are whitespace-tokenized; the MR column is parsed
// per kind.  strict: throw DataError on the first malformed line; otherwise
// collect LineErrors and keep going.
Dataset parse_dataset(const std::string& text, DatasetKind kind, const asdl::AsdlGrammar& g,
                      bool strict = true);
Dataset load_dataset(const std::string& path, DatasetKind kind, const asdl::AsdlGrammar& g,
                     bool strict = true);

// Canonical TSV: tokens joined by single spaces, MRs printed canonically,
// labeled lines first, one trailing newline.  Loading a canonical file and
// re-serializing reproduces it byte-for-byte.
std::string serialize_dataset(const asdl::AsdlGrammar& g, const Dataset& d);

// Canonical MR rendering for the kind (lambda form, Python-like line, or
// generic s-expression surface).
std::string print_mr(const asdl::AsdlGrammar& g, const asdl::Ast& z, DatasetKind kind);

// Deterministic K-element labeled subsample; the unlabeled pool becomes all
// training utterances (labeled + previously unlabeled).  Throws when
// K > labeled size.
Dataset subsample(const Dataset& d, int k, std::uint64_t seed);

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sempar::data
