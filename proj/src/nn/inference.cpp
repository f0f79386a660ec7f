#include "sempar/nn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sempar/nn/plain.hpp"
#include "sempar/transition/oracle.hpp"

namespace sempar::nn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

InferenceModel::InferenceModel(const ModelConfig& config,
                               const asdl::AsdlGrammar& grammar)
    : config_(config),
      grammar_(&grammar),
      n_ctors_(static_cast<int>(grammar.constructors().size())),
      encoder_("inf.enc", config.embed_dim, config.hidden_dim),
      // decoder input: prev action embedding + previous attentional vector +
      // parent feeding [field embed; type embed; parent state; parent ctor embed]
      decoder_("inf.dec",
               config.embed_dim + config.hidden_dim + config.field_type_embed_dim +
                   config.field_type_embed_dim + config.hidden_dim + config.embed_dim,
               config.hidden_dim) {
  config_.validate();
  if (config_.source.unk_id() < 0) throw std::logic_error("source vocabulary needs <unk>");
  if (config_.token.unk_id() < 0) throw std::logic_error("token vocabulary needs <unk>");
  if (!config_.token.has(transition::kFieldTerminator))
    throw std::logic_error("token vocabulary needs the field terminator");
}

void InferenceModel::init(ParamStore& store, util::Rng& rng) const {
  int e = config_.embed_dim, h = config_.hidden_dim, f = config_.field_type_embed_dim;
  store.add("inf.x_embed", e, config_.source.size(), 0.08, rng);
  store.add("inf.action_embed", e, action_count(), 0.08, rng);
  store.add("inf.field_embed", f, grammar_->field_count(), 0.08, rng);
  store.add("inf.type_embed", f, grammar_->type_count(), 0.08, rng);
  encoder_.init(store, rng);
  decoder_.init(store, rng);
  store.add("inf.att.Watt", 2 * h, h, std::sqrt(6.0 / (3.0 * h)), rng);
  store.add("inf.att.Wc", h, 3 * h, std::sqrt(6.0 / (4.0 * h)), rng);
  store.add("inf.out.W", action_count(), h, std::sqrt(6.0 / (action_count() + h)), rng);
  store.add_zeros("inf.out.b", action_count(), 1);
}

int InferenceModel::action_index(const transition::Action& a) const {
  switch (a.kind) {
    case transition::Action::Kind::Apply:
      return apply_index(a.ctor);
    case transition::Action::Kind::Reduce:
      return reduce_index();
    case transition::Action::Kind::GenToken:
      return gen_index(config_.token.id_or_unk(a.token));
  }
  throw std::logic_error("unreachable action kind");
}

transition::Action InferenceModel::action_at(int index) const {
  if (index < n_ctors_) return transition::Action::apply(index);
  if (index == n_ctors_) return transition::Action::reduce();
  return transition::Action::gen(config_.token.token(index - n_ctors_ - 1));
}

std::vector<char> InferenceModel::legal_mask(
    const transition::DerivationState& st) const {
  transition::ActionTemplates t = st.valid_actions();
  std::vector<char> mask(action_count(), 0);
  for (int c : t.apply_ctors) mask[apply_index(c)] = 1;
  if (t.reduce) mask[reduce_index()] = 1;
  int term = config_.token.id(transition::kFieldTerminator);
  for (int k = 0; k < config_.token.size(); ++k) {
    bool is_term = k == term;
    if ((t.gen_token && !is_term) || (t.gen_terminator && is_term))
      mask[gen_index(k)] = 1;
  }
  return mask;
}

// ---- gradient-free incremental decoder --------------------------------------

struct InferenceModel::Decoder {
  const InferenceModel& model;
  const ParamStore& store;
  Mat enc;  // 2H x |x|

  Decoder(const InferenceModel& model_, const ParamStore& store_,
          const std::vector<std::string>& x)
      : model(model_), store(store_) {
    if (x.empty()) throw std::invalid_argument("cannot parse an empty utterance");
    const Mat& embed = store.value("inf.x_embed");
    std::vector<Mat> inputs;
    inputs.reserve(x.size());
    for (const auto& tok : x)
      inputs.push_back(embed.col(model.config_.source.id_or_unk(tok)));
    enc = plain::bilstm_encode(store, "inf.enc", inputs, model.config_.hidden_dim);
  }

  struct State {
    plain::LstmState lstm;
    Mat stilde;
    std::vector<Mat> step_states;  // decoder h per history index
    int prev_action = -1;          // action index, -1 before the first step
  };

  State start() const {
    State st;
    st.lstm = plain::lstm_start(model.config_.hidden_dim);
    st.stilde = Mat::Zero(model.config_.hidden_dim, 1);
    return st;
  }

  Mat parent_vector(const transition::DerivationState& deriv,
                    const State& st) const {
    transition::FrontierInfo f = deriv.frontier();
    const Mat& fe = store.value("inf.field_embed");
    const Mat& te = store.value("inf.type_embed");
    const Mat& ae = store.value("inf.action_embed");
    int e = model.config_.embed_dim, h = model.config_.hidden_dim,
        fd = model.config_.field_type_embed_dim;
    Mat p(2 * fd + h + e, 1);
    p.block(0, 0, fd, 1) = fe.col(f.field_id);
    p.block(fd, 0, fd, 1) = te.col(f.type_id);
    if (f.parent_step >= 0)
      p.block(2 * fd, 0, h, 1) = st.step_states[static_cast<std::size_t>(f.parent_step)];
    else
      p.block(2 * fd, 0, h, 1).setZero();
    if (f.parent_ctor >= 0)
      p.block(2 * fd + h, 0, e, 1) = ae.col(model.apply_index(f.parent_ctor));
    else
      p.block(2 * fd + h, 0, e, 1).setZero();
    return p;
  }

  struct StepOut {
    plain::LstmState lstm;
    Mat stilde;
    std::vector<double> logp;  // masked log-probs over the action space
  };

  StepOut step(const State& st, const transition::DerivationState& deriv) const {
    int e = model.config_.embed_dim;
    Mat a_prev = st.prev_action >= 0
                     ? Mat(store.value("inf.action_embed").col(st.prev_action))
                     : Mat(Mat::Zero(e, 1));
    Mat p = parent_vector(deriv, st);
    Mat in(a_prev.rows() + st.stilde.rows() + p.rows(), 1);
    in << a_prev, st.stilde, p;
    StepOut out;
    out.lstm = plain::lstm_step(store, "inf.dec", in, st.lstm);
    out.stilde = plain::attention_vector(store, "inf.att", enc, out.lstm.h);
    Mat logits = store.value("inf.out.W") * out.stilde + store.value("inf.out.b");
    std::vector<char> mask = model.legal_mask(deriv);
    double hi = kNegInf;
    for (int k = 0; k < model.action_count(); ++k)
      if (mask[k]) hi = std::max(hi, logits(k, 0));
    if (hi == kNegInf) throw std::logic_error("empty legal action set");
    double total = 0;
    for (int k = 0; k < model.action_count(); ++k)
      if (mask[k]) total += std::exp(logits(k, 0) - hi);
    double lse = hi + std::log(total);
    out.logp.assign(static_cast<std::size_t>(model.action_count()), kNegInf);
    for (int k = 0; k < model.action_count(); ++k)
      if (mask[k]) out.logp[static_cast<std::size_t>(k)] = logits(k, 0) - lse;
    return out;
  }

  State advance(const State& st, const StepOut& out, int action_index) const {
    State next;
    next.lstm = out.lstm;
    next.stilde = out.stilde;
    next.step_states = st.step_states;
    next.step_states.push_back(out.lstm.h);
    next.prev_action = action_index;
    return next;
  }
};

double InferenceModel::actions_log_prob(
    const ParamStore& store, const std::vector<std::string>& x,
    const std::vector<transition::Action>& actions) const {
  Decoder dec(*this, store, x);
  Decoder::State st = dec.start();
  transition::DerivationState deriv = transition::DerivationState::initial(*grammar_);
  double total = 0;
  for (const auto& a : actions) {
    Decoder::StepOut out = dec.step(st, deriv);
    int idx = action_index(a);
    total += out.logp[static_cast<std::size_t>(idx)];
    st = dec.advance(st, out, idx);
    deriv.apply(a);
  }
  if (!deriv.complete()) throw std::invalid_argument("action sequence leaves an incomplete AST");
  return total;
}

double InferenceModel::log_prob(const ParamStore& store,
                                const std::vector<std::string>& x,
                                const asdl::Ast& z) const {
  return actions_log_prob(store, x, transition::ast_to_actions(*grammar_, z));
}

std::vector<double> InferenceModel::step_log_probs(
    const ParamStore& store, const std::vector<std::string>& x,
    const std::vector<transition::Action>& prefix) const {
  Decoder dec(*this, store, x);
  Decoder::State st = dec.start();
  transition::DerivationState deriv = transition::DerivationState::initial(*grammar_);
  for (const auto& a : prefix) {
    Decoder::StepOut out = dec.step(st, deriv);
    st = dec.advance(st, out, action_index(a));
    deriv.apply(a);
  }
  return dec.step(st, deriv).logp;
}

Eigen::VectorXd InferenceModel::utterance_encoding(const ParamStore& store,
                                                   const std::vector<std::string>& x) const {
  Decoder dec(*this, store, x);
  int h = config_.hidden_dim;
  Eigen::VectorXd out(2 * h);
  out.head(h) = dec.enc.block(0, dec.enc.cols() - 1, h, 1);
  out.tail(h) = dec.enc.block(h, 0, h, 1);
  return out;
}

SampleSet InferenceModel::beam_search(const ParamStore& store,
                                      const std::vector<std::string>& x, int beam,
                                      int max_steps) const {
  if (beam < 1) throw std::invalid_argument("beam width must be >= 1");
  Decoder dec(*this, store, x);

  struct Hyp {
    transition::DerivationState deriv;
    Decoder::State st;
    double score = 0;
  };
  std::vector<Hyp> alive;
  alive.push_back({transition::DerivationState::initial(*grammar_), dec.start(), 0.0});
  std::vector<ScoredAst> done;

  for (int step = 0; step < max_steps && !alive.empty(); ++step) {
    std::vector<Hyp> candidates;
    for (const Hyp& hyp : alive) {
      Decoder::StepOut out = dec.step(hyp.st, hyp.deriv);
      for (int k = 0; k < action_count(); ++k) {
        double lp = out.logp[static_cast<std::size_t>(k)];
        if (lp == kNegInf) continue;
        Hyp next;
        next.deriv = hyp.deriv;
        next.deriv.apply(action_at(k));
        next.st = dec.advance(hyp.st, out, k);
        next.score = hyp.score + lp;
        candidates.push_back(std::move(next));
      }
    }
    // stable sort keeps the deterministic (hypothesis, action) emission order
    // as the tie-break
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hyp& a, const Hyp& b) { return a.score > b.score; });
    alive.clear();
    for (Hyp& hyp : candidates) {
      if (hyp.deriv.complete()) {
        if (static_cast<int>(done.size()) < beam)
          done.push_back({hyp.deriv.ast(), hyp.score});
      } else if (static_cast<int>(alive.size()) < beam) {
        alive.push_back(std::move(hyp));
      }
    }
  }
  if (done.empty())
    throw std::runtime_error("beam search found no complete derivation within the step limit");
  std::stable_sort(done.begin(), done.end(),
                   [](const ScoredAst& a, const ScoredAst& b) { return a.score > b.score; });
  if (static_cast<int>(done.size()) > beam) done.resize(static_cast<std::size_t>(beam));
  return done;
}

ScoredAst InferenceModel::sample(const ParamStore& store,
                                 const std::vector<std::string>& x, util::Rng& rng,
                                 int max_steps) const {
  Decoder dec(*this, store, x);
  Decoder::State st = dec.start();
  transition::DerivationState deriv = transition::DerivationState::initial(*grammar_);
  double total = 0;
  for (int step = 0; step < max_steps; ++step) {
    if (deriv.complete()) return {deriv.ast(), total};
    Decoder::StepOut out = dec.step(st, deriv);
    std::vector<double> weights(out.logp.size());
    for (std::size_t k = 0; k < out.logp.size(); ++k)
      weights[k] = out.logp[k] == kNegInf ? 0.0 : std::exp(out.logp[k]);
    int idx = static_cast<int>(rng.categorical(weights));
    total += out.logp[static_cast<std::size_t>(idx)];
    st = dec.advance(st, out, idx);
    deriv.apply(action_at(idx));
  }
  if (deriv.complete()) return {deriv.ast(), total};
  throw std::runtime_error("sampled derivation did not complete within the step limit");
}

Var InferenceModel::log_prob_var(Tape& t, ParamStore& store,
                                 const std::vector<std::string>& x,
                                 const std::vector<transition::Action>& actions,
                                 util::Rng* dropout_rng, bool train) const {
  if (x.empty()) throw std::invalid_argument("cannot parse an empty utterance");
  Var x_embed = store.leaf(t, "inf.x_embed");
  Var a_embed = store.leaf(t, "inf.action_embed");
  Var f_embed = store.leaf(t, "inf.field_embed");
  Var t_embed = store.leaf(t, "inf.type_embed");
  std::vector<Var> inputs;
  inputs.reserve(x.size());
  for (const auto& tok : x)
    inputs.push_back(col(x_embed, config_.source.id_or_unk(tok)));
  std::vector<Var> enc_cols = encoder_.encode(t, store, inputs);
  if (train && dropout_rng)
    for (auto& h : enc_cols) h = dropout(h, config_.dropout_rate, *dropout_rng, true);
  Var enc = stack_cols(enc_cols);

  Var watt = store.leaf(t, "inf.att.Watt");
  Var wc = store.leaf(t, "inf.att.Wc");
  Var wout = store.leaf(t, "inf.out.W");
  Var bout = store.leaf(t, "inf.out.b");

  int e = config_.embed_dim, h = config_.hidden_dim;
  LstmCell::State s = decoder_.start(t);
  Var stilde = input(t, Mat::Zero(h, 1));
  Var zero_e = input(t, Mat::Zero(e, 1));
  Var zero_h = input(t, Mat::Zero(h, 1));

  transition::DerivationState deriv = transition::DerivationState::initial(*grammar_);
  std::vector<Var> step_states;
  Var prev_a = zero_e;
  std::vector<Var> terms;
  for (const auto& a : actions) {
    transition::FrontierInfo f = deriv.frontier();
    Var nf = col(f_embed, f.field_id);
    Var ef = col(t_embed, f.type_id);
    Var sp = f.parent_step >= 0 ? step_states[static_cast<std::size_t>(f.parent_step)]
                                : zero_h;
    Var cp = f.parent_ctor >= 0 ? col(a_embed, apply_index(f.parent_ctor)) : zero_e;
    Var in = concat({prev_a, stilde, nf, ef, sp, cp});
    s = decoder_.step(t, store, in, s);
    if (train && dropout_rng)
      s.h = dropout(s.h, config_.dropout_rate, *dropout_rng, true);
    step_states.push_back(s.h);
    Var scores = mat_t_vec(enc, matmul(watt, s.h));
    Var alpha = softmax_v(scores);
    Var ctx = matmul(enc, alpha);
    stilde = tanh_v(matmul(wc, concat({ctx, s.h})));
    Var logits = add(matmul(wout, stilde), bout);
    Var logp = masked_log_softmax(logits, legal_mask(deriv));
    int idx = action_index(a);
    terms.push_back(pick(logp, idx));
    prev_a = col(a_embed, idx);
    deriv.apply(a);
  }
  if (!deriv.complete()) throw std::invalid_argument("action sequence leaves an incomplete AST");
  return vsum(concat(terms));
}

}  // namespace sempar::nn
