#include "sempar/nn/lstm.hpp"

#include <cmath>

namespace sempar::nn {

void LstmCell::init(ParamStore& store, util::Rng& rng) const {
  double sx = std::sqrt(6.0 / (input_dim_ + 4.0 * hidden_dim_));
  double sh = std::sqrt(6.0 / (hidden_dim_ + 4.0 * hidden_dim_));
  store.add(prefix_ + ".Wx", 4 * hidden_dim_, input_dim_, sx, rng);
  store.add(prefix_ + ".Wh", 4 * hidden_dim_, hidden_dim_, sh, rng);
  Mat& b = store.add_zeros(prefix_ + ".b", 4 * hidden_dim_, 1);
  // forget-gate bias starts at 1 so early training does not wipe the cell
  b.block(hidden_dim_, 0, hidden_dim_, 1).setOnes();
}

LstmCell::State LstmCell::start(Tape& t) const {
  return {input(t, Mat::Zero(hidden_dim_, 1)), input(t, Mat::Zero(hidden_dim_, 1))};
}

LstmCell::State LstmCell::step(Tape& t, ParamStore& store, Var x,
                               const State& prev) const {
  Var gates = add(add(matmul(store.leaf(t, prefix_ + ".Wx"), x),
                      matmul(store.leaf(t, prefix_ + ".Wh"), prev.h)),
                  store.leaf(t, prefix_ + ".b"));
  Var i = sigmoid_v(slice(gates, 0, hidden_dim_));
  Var f = sigmoid_v(slice(gates, hidden_dim_, hidden_dim_));
  Var g = tanh_v(slice(gates, 2 * hidden_dim_, hidden_dim_));
  Var o = sigmoid_v(slice(gates, 3 * hidden_dim_, hidden_dim_));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh_v(c));
  return {h, c};
}

std::vector<Var> BiLstmEncoder::encode(Tape& t, ParamStore& store,
                                       const std::vector<Var>& inputs) const {
  std::vector<Var> fh(inputs.size());
  LstmCell::State s = fwd_.start(t);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    s = fwd_.step(t, store, inputs[j], s);
    fh[j] = s.h;
  }
  std::vector<Var> bh(inputs.size());
  s = bwd_.start(t);
  for (std::size_t j = inputs.size(); j-- > 0;) {
    s = bwd_.step(t, store, inputs[j], s);
    bh[j] = s.h;
  }
  std::vector<Var> out(inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) out[j] = concat({fh[j], bh[j]});
  return out;
}

}  // namespace sempar::nn
