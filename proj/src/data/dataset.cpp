#include "sempar/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sempar/mr/lambda_form.hpp"
#include "sempar/mr/pylite.hpp"
#include "sempar/util/rng.hpp"
#include "sempar/util/text.hpp"

namespace sempar::data {

const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::Lambda: return "lambda";
    case DatasetKind::PyLite: return "pylite";
    case DatasetKind::Toy: return "toy";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "lambda") return DatasetKind::Lambda;
  if (s == "pylite") return DatasetKind::PyLite;
  if (s == "toy") return DatasetKind::Toy;
  throw DataError("unknown dataset kind '" + s + "' (expected lambda|pylite|toy)");
}

mr::MrKind to_mr_kind(DatasetKind k) {
  switch (k) {
    case DatasetKind::Lambda: return mr::MrKind::Lambda;
    case DatasetKind::PyLite: return mr::MrKind::PyLite;
    case DatasetKind::Toy: return mr::MrKind::Generic;
  }
  return mr::MrKind::Generic;
}

namespace {

asdl::Ast parse_mr(const asdl::AsdlGrammar& g, const std::string& text, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Lambda: return mr::lf_parse(g, text);
    case DatasetKind::PyLite: return mr::pylite_parse(g, text);
    case DatasetKind::Toy: {
      mr::LinearMR m;
      m.kind = mr::MrKind::Generic;
      m.tokens = util::split_ws(text);
      return mr::delinearize(g, m);
    }
  }
  throw DataError("unreachable dataset kind");
}

}  // namespace

std::string print_mr(const asdl::AsdlGrammar& g, const asdl::Ast& z, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Lambda: return mr::lf_print(g, z);
    case DatasetKind::PyLite: return mr::pylite_print(g, z);
    case DatasetKind::Toy: return mr::surface(mr::linearize(g, z, mr::MrKind::Generic));
  }
  throw DataError("unreachable dataset kind");
}

Dataset parse_dataset(const std::string& text, DatasetKind kind, const asdl::AsdlGrammar& g,
                      bool strict) {
  Dataset d;
  d.kind = kind;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty()) continue;
    auto tab = line.find('\t');
    std::string utt = tab == std::string::npos ? line : line.substr(0, tab);
    std::vector<std::string> x = util::split_ws(utt);
    if (x.empty()) {
      std::string msg = "line " + std::to_string(lineno) + ": empty utterance";
      if (strict) throw DataError(msg);
      d.errors.push_back({lineno, msg});
      continue;
    }
    if (tab == std::string::npos) {
      d.unlabeled.push_back(std::move(x));
      continue;
    }
    std::string mr_text = util::trim(line.substr(tab + 1));
    if (line.find('\t', tab + 1) != std::string::npos) {
      std::string msg = "line " + std::to_string(lineno) + ": more than one tab";
      if (strict) throw DataError(msg);
      d.errors.push_back({lineno, msg});
      continue;
    }
    try {
      LabeledExample e;
      e.x = std::move(x);
      e.z = parse_mr(g, mr_text, kind);
      d.labeled.push_back(std::move(e));
    } catch (const std::exception& ex) {
      std::string msg = "line " + std::to_string(lineno) + ": " + ex.what();
      if (strict) throw DataError(msg);
      d.errors.push_back({lineno, msg});
    }
  }
  return d;
}

Dataset load_dataset(const std::string& path, DatasetKind kind, const asdl::AsdlGrammar& g,
                     bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), kind, g, strict);
}

std::string serialize_dataset(const asdl::AsdlGrammar& g, const Dataset& d) {
  std::string out;
  for (const LabeledExample& e : d.labeled) {
    out += util::join(e.x, " ");
    out += '\t';
    out += print_mr(g, e.z, d.kind);
    out += '\n';
  }
  for (const std::vector<std::string>& x : d.unlabeled) {
    out += util::join(x, " ");
    out += '\n';
  }
  return out;
}

Dataset subsample(const Dataset& d, int k, std::uint64_t seed) {
  if (k < 0 || static_cast<std::size_t>(k) > d.labeled.size())
    throw DataError("subsample: K=" + std::to_string(k) + " exceeds labeled size " +
                    std::to_string(d.labeled.size()));
  util::Rng rng(seed);
  std::vector<std::size_t> idx = rng.sample_without_replacement(d.labeled.size(), k);
  std::sort(idx.begin(), idx.end());  // keep original order within the subset

  Dataset out;
  out.kind = d.kind;
  for (std::size_t i : idx) out.labeled.push_back(d.labeled[i]);
  // The unlabeled pool is every training utterance.
  for (const LabeledExample& e : d.labeled) out.unlabeled.push_back(e.x);
  for (const std::vector<std::string>& x : d.unlabeled) out.unlabeled.push_back(x);
  return out;
}

}  // namespace sempar::data
