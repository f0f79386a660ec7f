#include "sempar/data/toy.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include "sempar/transition/action.hpp"
#include "sempar/transition/oracle.hpp"
#include "sempar/util/text.hpp"

namespace sempar::data {

namespace {

const char* kToyGrammar = R"(# home-automation commands
primitives: device, room

cmd = PowerOn(device target)
    | PowerOff(device target)
    | Toggle(device target)
    | Status(room where)
    | Lock(room where)
    | Unlock(room where)
    | AllOn()
    | AllOff()
)";

const std::vector<std::string> kDevices = {"lamp", "fan", "heater"};
const std::vector<std::string> kRooms = {"kitchen", "garage", "porch"};

// Utterance templates per constructor; "%" is the argument slot.
const std::map<std::string, std::vector<std::string>>& templates() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"PowerOn", {"turn on the %", "please switch the % on", "power up the %"}},
      {"PowerOff", {"turn off the %", "switch the % off", "shut the % down"}},
      {"Toggle", {"toggle the %", "flip the % switch"}},
      {"Status", {"status of the %", "how is the % doing", "check on the %"}},
      {"Lock", {"lock the %", "secure the %"}},
      {"Unlock", {"unlock the %", "open up the %"}},
      {"AllOn", {"turn everything on", "all devices on please"}},
      {"AllOff", {"turn everything off", "power everything down", "all devices off"}},
  };
  return t;
}

struct Sampled {
  std::vector<std::string> x;
  asdl::Ast z;
};

Sampled sample_example(const asdl::AsdlGrammar& g, util::Rng& rng) {
  const auto& tpl = templates();
  const auto& ctors = g.constructors();
  int ci = static_cast<int>(rng.below(ctors.size()));
  const asdl::Constructor& c = ctors[ci];

  asdl::Ast z;
  std::string arg;
  int node = z.add_composite(ci, c.fields.size());
  z.root = node;
  if (!c.fields.empty()) {
    const std::vector<std::string>& pool =
        c.fields[0].type_name == "device" ? kDevices : kRooms;
    arg = pool[rng.below(pool.size())];
    z.node(node).children[0].push_back(z.add_primitive({arg}));
  }

  const std::vector<std::string>& options = tpl.at(c.name);
  std::vector<std::string> words =
      util::split_ws(options[rng.below(options.size())]);
  for (std::string& w : words) {
    if (w == "%") w = arg;
  }
  return {std::move(words), std::move(z)};
}

Dataset make_split(const asdl::AsdlGrammar& g, util::Rng& rng, int n) {
  Dataset d;
  d.kind = DatasetKind::Toy;
  for (int i = 0; i < n; ++i) {
    Sampled s = sample_example(g, rng);
    d.labeled.push_back({std::move(s.x), std::move(s.z)});
  }
  return d;
}

}  // namespace

const std::string& toy_grammar_text() {
  static const std::string text = kToyGrammar;
  return text;
}

transition::TokenCandidates ToyTask::token_pools() const {
  return transition::token_pool({{"device", kDevices}, {"room", kRooms}});
}

ToyTask make_toy_task(std::uint64_t seed, const ToySizes& sizes) {
  ToyTask t{asdl::parse_grammar(toy_grammar_text(), kToyRoot), {}, {}, {}};
  util::Rng rng(seed);
  t.train = make_split(t.grammar, rng, sizes.train);
  t.dev = make_split(t.grammar, rng, sizes.dev);
  t.test = make_split(t.grammar, rng, sizes.test);
  return t;
}

nn::ModelConfig build_model_config(const asdl::AsdlGrammar& g, mr::MrKind kind,
                                   const std::vector<LabeledExample>& labeled, int embed_dim,
                                   int hidden_dim, int field_type_embed_dim,
                                   double dropout_rate) {
  if (labeled.empty()) throw std::invalid_argument("build_model_config: no labeled examples");
  std::vector<std::vector<std::string>> utterances;
  std::vector<std::vector<std::string>> mr_streams;
  std::set<std::string> gen_tokens = {transition::kFieldTerminator};
  for (const LabeledExample& e : labeled) {
    utterances.push_back(e.x);
    mr_streams.push_back(mr::linearize(g, e.z, kind).tokens);
    for (const transition::Action& a : transition::ast_to_actions(g, e.z)) {
      if (a.kind == transition::Action::Kind::GenToken) gen_tokens.insert(a.token);
    }
  }
  nn::ModelConfig cfg;
  cfg.embed_dim = embed_dim;
  cfg.hidden_dim = hidden_dim;
  cfg.field_type_embed_dim = field_type_embed_dim;
  cfg.dropout_rate = dropout_rate;
  cfg.source = Vocab::build(utterances, 1, {kUnk, kBos, kEos});
  cfg.target = Vocab::build(mr_streams, 1, {kUnk});
  std::vector<std::vector<std::string>> gen_seq(1);
  gen_seq[0].assign(gen_tokens.begin(), gen_tokens.end());
  cfg.token = Vocab::build(gen_seq, 1, {kUnk});
  cfg.validate();
  return cfg;
}

}  // namespace sempar::data
