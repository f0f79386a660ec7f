#include "sempar/nn/reconstruction.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "sempar/nn/plain.hpp"

namespace sempar::nn {

ReconstructionModel::ReconstructionModel(const ModelConfig& config)
    : config_(config),
      encoder_("rec.enc", config.embed_dim, config.hidden_dim),
      decoder_("rec.dec", config.embed_dim + config.hidden_dim, config.hidden_dim) {
  config_.validate();
  if (config_.source.unk_id() < 0 || !config_.source.has(data::kBos) ||
      !config_.source.has(data::kEos))
    throw std::logic_error("source vocabulary needs <unk>, <s> and </s>");
  if (config_.target.unk_id() < 0)
    throw std::logic_error("target vocabulary needs <unk>");
}

void ReconstructionModel::init(ParamStore& store, util::Rng& rng) const {
  int e = config_.embed_dim, h = config_.hidden_dim;
  store.add("rec.mr_embed", e, config_.target.size(), 0.08, rng);
  store.add("rec.x_embed", e, config_.source.size(), 0.08, rng);
  encoder_.init(store, rng);
  decoder_.init(store, rng);
  store.add("rec.att.Watt", 2 * h, h, std::sqrt(6.0 / (3.0 * h)), rng);
  store.add("rec.att.Wc", h, 3 * h, std::sqrt(6.0 / (4.0 * h)), rng);
  store.add("rec.gate.W", 2, h, std::sqrt(6.0 / (2 + h)), rng);
  store.add("rec.out.W", config_.source.size(), h,
            std::sqrt(6.0 / (config_.source.size() + h)), rng);
  store.add_zeros("rec.out.b", config_.source.size(), 1);
  store.add("rec.ptr.W", 2 * h, h, std::sqrt(6.0 / (3.0 * h)), rng);
}

// ---- gradient-free incremental decoder --------------------------------------

struct ReconstructionModel::Decoder {
  const ReconstructionModel& model;
  const ParamStore& store;
  std::vector<std::string> mr_tokens;
  Mat enc;                                   // 2H x |m|
  std::map<std::string, std::vector<int>> positions;  // MR token -> positions
  plain::LstmState s;
  Mat stilde;

  Decoder(const ReconstructionModel& model_, const ParamStore& store_,
          const mr::LinearMR& m)
      : model(model_), store(store_), mr_tokens(m.tokens) {
    if (mr_tokens.empty()) throw std::invalid_argument("cannot condition on an empty MR");
    const Mat& embed = store.value("rec.mr_embed");
    std::vector<Mat> inputs;
    inputs.reserve(mr_tokens.size());
    for (const auto& tok : mr_tokens)
      inputs.push_back(embed.col(model.config_.target.id_or_unk(tok)));
    enc = plain::bilstm_encode(store, "rec.enc", inputs, model.config_.hidden_dim);
    for (std::size_t j = 0; j < mr_tokens.size(); ++j)
      positions[mr_tokens[j]].push_back(static_cast<int>(j));
    s = plain::lstm_start(model.config_.hidden_dim);
    stilde = Mat::Zero(model.config_.hidden_dim, 1);
  }

  struct StepOut {
    double p_gen;
    double p_copy;
    Mat gen;  // |source| x 1
    Mat ptr;  // |m| x 1
  };

  // Advances on prev_token and returns the channel distributions.
  StepOut step(const std::string& prev_token) {
    const data::Vocab& sv = model.config_.source;
    Mat prev = store.value("rec.x_embed").col(sv.id_or_unk(prev_token));
    Mat in(prev.rows() + stilde.rows(), 1);
    in << prev, stilde;
    s = plain::lstm_step(store, "rec.dec", in, s);
    stilde = plain::attention_vector(store, "rec.att", enc, s.h);
    Mat gates = plain::softmax(store.value("rec.gate.W") * stilde);
    Mat gen = plain::softmax(store.value("rec.out.W") * stilde + store.value("rec.out.b"));
    Mat ptr = plain::softmax(enc.transpose() * (store.value("rec.ptr.W") * stilde));
    return {gates(0, 0), gates(1, 0), std::move(gen), std::move(ptr)};
  }

  double copy_mass(const StepOut& out, const std::string& tok) const {
    auto it = positions.find(tok);
    if (it == positions.end()) return 0.0;
    double mass = 0;
    for (int j : it->second) mass += out.ptr(j, 0);
    return mass;
  }

  // Scores one surface token, marginalizing the two channels.
  StepTrace score(const StepOut& out, const std::string& tok) const {
    const data::Vocab& sv = model.config_.source;
    StepTrace tr;
    tr.token = tok;
    tr.p_gen = out.p_gen;
    tr.p_copy = out.p_copy;
    tr.p_token_copy = copy_mass(out, tok);
    int id = sv.id(tok);
    if (id >= 0) {
      tr.p_token_gen = out.gen(id, 0);
    } else if (tr.p_token_copy > 0.0) {
      tr.p_token_gen = 0.0;  // OOV present in the MR: copy channel only
    } else {
      tr.p_token_gen = out.gen(sv.unk_id(), 0);  // OOV absent everywhere
      tr.oov_unk_gen = true;
    }
    return tr;
  }
};

ReconstructionModel::Result ReconstructionModel::log_prob(
    const ParamStore& store, const std::vector<std::string>& x,
    const mr::LinearMR& m) const {
  if (x.empty()) throw std::invalid_argument("cannot score an empty utterance");
  Decoder dec(*this, store, m);
  Result result;
  std::string prev = data::kBos;
  for (std::size_t i = 0; i <= x.size(); ++i) {
    Decoder::StepOut out = dec.step(prev);
    const std::string& tok = i < x.size() ? x[i] : data::kEos;
    StepTrace tr = dec.score(out, tok);
    result.log_prob += std::log(
        combine_step_prob(tr.p_gen, tr.p_token_gen, tr.p_copy, tr.p_token_copy));
    result.steps.push_back(tr);
    prev = tok;
  }
  return result;
}

std::vector<std::pair<std::string, double>> ReconstructionModel::next_distribution(
    const ParamStore& store, const std::vector<std::string>& x_prefix,
    const mr::LinearMR& m) const {
  Decoder dec(*this, store, m);
  Decoder::StepOut out = dec.step(data::kBos);
  for (const auto& tok : x_prefix) out = dec.step(tok);
  std::vector<std::pair<std::string, double>> dist;
  for (int k = 0; k < config_.source.size(); ++k) {
    const std::string& tok = config_.source.token(k);
    dist.push_back({tok, combine_step_prob(out.p_gen, out.gen(k, 0), out.p_copy,
                                           dec.copy_mass(out, tok))});
  }
  for (const auto& [tok, pos] : dec.positions) {
    if (config_.source.id(tok) >= 0) continue;
    dist.push_back({tok, out.p_copy * dec.copy_mass(out, tok)});
  }
  return dist;
}

std::vector<std::string> ReconstructionModel::sample_x(const ParamStore& store,
                                                       const mr::LinearMR& m,
                                                       util::Rng& rng,
                                                       int max_len) const {
  Decoder dec(*this, store, m);
  std::vector<std::string> out;
  std::string prev = data::kBos;
  for (int i = 0; i < max_len; ++i) {
    Decoder::StepOut step = dec.step(prev);
    // candidate surface forms: all vocabulary tokens + OOV MR tokens
    std::vector<std::string> cands;
    std::vector<double> weights;
    for (int k = 0; k < config_.source.size(); ++k) {
      const std::string& tok = config_.source.token(k);
      cands.push_back(tok);
      weights.push_back(combine_step_prob(step.p_gen, step.gen(k, 0), step.p_copy,
                                          dec.copy_mass(step, tok)));
    }
    for (const auto& [tok, pos] : dec.positions) {
      if (config_.source.id(tok) >= 0) continue;
      cands.push_back(tok);
      weights.push_back(step.p_copy * dec.copy_mass(step, tok));
    }
    const std::string& tok = cands[rng.categorical(weights)];
    if (tok == data::kEos) break;
    out.push_back(tok);
    prev = tok;
  }
  return out;
}

Var ReconstructionModel::log_prob_var(Tape& t, ParamStore& store,
                                      const std::vector<std::string>& x,
                                      const mr::LinearMR& m, util::Rng* dropout_rng,
                                      bool train) const {
  if (x.empty()) throw std::invalid_argument("cannot score an empty utterance");
  if (m.tokens.empty()) throw std::invalid_argument("cannot condition on an empty MR");
  const data::Vocab& sv = config_.source;

  Var mr_embed = store.leaf(t, "rec.mr_embed");
  Var x_embed = store.leaf(t, "rec.x_embed");
  std::vector<Var> inputs;
  inputs.reserve(m.tokens.size());
  for (const auto& tok : m.tokens)
    inputs.push_back(col(mr_embed, config_.target.id_or_unk(tok)));
  std::vector<Var> enc_cols = encoder_.encode(t, store, inputs);
  if (train && dropout_rng)
    for (auto& h : enc_cols) h = dropout(h, config_.dropout_rate, *dropout_rng, true);
  Var enc = stack_cols(enc_cols);

  std::map<std::string, std::vector<int>> positions;
  for (std::size_t j = 0; j < m.tokens.size(); ++j)
    positions[m.tokens[j]].push_back(static_cast<int>(j));

  Var watt = store.leaf(t, "rec.att.Watt");
  Var wc = store.leaf(t, "rec.att.Wc");
  Var wgate = store.leaf(t, "rec.gate.W");
  Var wout = store.leaf(t, "rec.out.W");
  Var bout = store.leaf(t, "rec.out.b");
  Var wptr = store.leaf(t, "rec.ptr.W");

  LstmCell::State s = decoder_.start(t);
  Var stilde = input(t, Mat::Zero(config_.hidden_dim, 1));
  std::vector<Var> terms;
  std::string prev = data::kBos;
  for (std::size_t i = 0; i <= x.size(); ++i) {
    Var in = concat({col(x_embed, sv.id_or_unk(prev)), stilde});
    s = decoder_.step(t, store, in, s);
    if (train && dropout_rng)
      s.h = dropout(s.h, config_.dropout_rate, *dropout_rng, true);
    Var scores = mat_t_vec(enc, matmul(watt, s.h));
    Var alpha = softmax_v(scores);
    Var ctx = matmul(enc, alpha);
    stilde = tanh_v(matmul(wc, concat({ctx, s.h})));
    Var gates = softmax_v(matmul(wgate, stilde));
    Var gen = softmax_v(add(matmul(wout, stilde), bout));
    Var ptr = softmax_v(mat_t_vec(enc, matmul(wptr, stilde)));

    const std::string& tok = i < x.size() ? x[i] : data::kEos;
    Var p_gen = pick(gates, 0);
    Var p_copy = pick(gates, 1);
    auto pos_it = positions.find(tok);
    Var copy_tok;  // pointer mass on positions holding tok
    if (pos_it != positions.end()) {
      Mat mask = Mat::Zero(static_cast<Eigen::Index>(m.tokens.size()), 1);
      for (int j : pos_it->second) mask(j, 0) = 1.0;
      copy_tok = dot(ptr, input(t, mask));
    } else {
      copy_tok = input(t, Mat::Zero(1, 1));
    }
    int id = sv.id(tok);
    Var gen_tok;
    if (id >= 0) {
      gen_tok = pick(gen, id);
    } else if (pos_it != positions.end()) {
      gen_tok = input(t, Mat::Zero(1, 1));  // OOV in MR: copy channel only
    } else {
      gen_tok = pick(gen, sv.unk_id());  // UNK-generate fallback
    }
    Var p = add(mul(p_gen, gen_tok), mul(p_copy, copy_tok));
    terms.push_back(log_v(p));
    prev = tok;
  }
  return vsum(concat(terms));
}

}  // namespace sempar::nn
