#pragma once

#include <string>
#include <vector>

#include "sempar/nn/param_store.hpp"
#include "sempar/nn/tensor.hpp"

namespace sempar::nn::plain {

// Gradient-free forward passes over raw Eigen matrices, for scoring, sampling
// and search.  Must stay numerically identical to the tape versions; the unit
// tests compare the two pass values directly.

struct LstmState {
  Mat h;
  Mat c;
};

inline LstmState lstm_start(int hidden) {
  return {Mat::Zero(hidden, 1), Mat::Zero(hidden, 1)};
}

inline LstmState lstm_step(const ParamStore& store, const std::string& prefix,
                           const Mat& x, const LstmState& prev) {
  const Mat& wx = store.value(prefix + ".Wx");
  const Mat& wh = store.value(prefix + ".Wh");
  const Mat& b = store.value(prefix + ".b");
  Eigen::Index hdim = prev.h.rows();
  Mat gates = wx * x + wh * prev.h + b;
  auto seg = [&](Eigen::Index k) { return gates.block(k * hdim, 0, hdim, 1); };
  Mat i = (1.0 / (1.0 + (-seg(0)).array().exp())).matrix();
  Mat f = (1.0 / (1.0 + (-seg(1)).array().exp())).matrix();
  Mat g = seg(2).array().tanh().matrix();
  Mat o = (1.0 / (1.0 + (-seg(3)).array().exp())).matrix();
  Mat c = f.cwiseProduct(prev.c) + i.cwiseProduct(g);
  Mat h = o.cwiseProduct(c.array().tanh().matrix());
  return {h, c};
}

// Bidirectional encoding: column j of the result is [fwd_j; bwd_j].
inline Mat bilstm_encode(const ParamStore& store, const std::string& prefix,
                         const std::vector<Mat>& inputs, int hidden) {
  Mat out(2 * hidden, static_cast<Eigen::Index>(inputs.size()));
  LstmState s = lstm_start(hidden);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    s = lstm_step(store, prefix + ".fwd", inputs[j], s);
    out.block(0, static_cast<Eigen::Index>(j), hidden, 1) = s.h;
  }
  s = lstm_start(hidden);
  for (std::size_t j = inputs.size(); j-- > 0;) {
    s = lstm_step(store, prefix + ".bwd", inputs[j], s);
    out.block(hidden, static_cast<Eigen::Index>(j), hidden, 1) = s.h;
  }
  return out;
}

inline Mat softmax(const Mat& v) {
  Eigen::ArrayXd e = (v.array() - v.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

// Luong-style attention: scores_j = enc_j^T (W s); returns tanh(Wc [ctx; s]).
inline Mat attention_vector(const ParamStore& store, const std::string& prefix,
                            const Mat& enc, const Mat& s) {
  Mat scores = enc.transpose() * (store.value(prefix + ".Watt") * s);
  Mat alpha = softmax(scores);
  Mat ctx = enc * alpha;
  Mat cs(ctx.rows() + s.rows(), 1);
  cs << ctx, s;
  return (store.value(prefix + ".Wc") * cs).array().tanh().matrix();
}

inline double log_sum_exp(const std::vector<double>& xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double total = 0;
  for (double x : xs) total += std::exp(x - hi);
  return hi + std::log(total);
}

}  // namespace sempar::nn::plain
