#pragma once

#include <string>
#include <vector>

#include "sempar/nn/param_store.hpp"
#include "sempar/nn/tensor.hpp"

namespace sempar::nn {

// Single LSTM cell.  Parameters live in a ParamStore under `prefix`.
class LstmCell {
 public:
  LstmCell(std::string prefix, int input_dim, int hidden_dim)
      : prefix_(std::move(prefix)), input_dim_(input_dim), hidden_dim_(hidden_dim) {}

  void init(ParamStore& store, util::Rng& rng) const;

  struct State {
    Var h;
    Var c;
  };

  // Zero initial state on the given tape.
  State start(Tape& t) const;

  State step(Tape& t, ParamStore& store, Var x, const State& prev) const;

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
  int input_dim_;
  int hidden_dim_;
};

// Bidirectional LSTM over a sequence of input vectors; output j is the
// concatenation of the forward state at j and the backward state at j
// (dimension 2 * hidden_dim).
class BiLstmEncoder {
 public:
  BiLstmEncoder(const std::string& prefix, int input_dim, int hidden_dim)
      : fwd_(prefix + ".fwd", input_dim, hidden_dim),
        bwd_(prefix + ".bwd", input_dim, hidden_dim) {}

  void init(ParamStore& store, util::Rng& rng) const {
    fwd_.init(store, rng);
    bwd_.init(store, rng);
  }

  std::vector<Var> encode(Tape& t, ParamStore& store, const std::vector<Var>& inputs) const;

  int output_dim() const { return 2 * fwd_.hidden_dim(); }

 private:
  LstmCell fwd_;
  LstmCell bwd_;
};

}  // namespace sempar::nn
