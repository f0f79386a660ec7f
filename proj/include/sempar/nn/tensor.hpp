#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sempar/util/rng.hpp"

namespace sempar::nn {

using Mat = Eigen::MatrixXd;  // vectors are n-by-1 columns; 64-bit throughout

class Tape;

// Handle into a tape node; cheap to copy, valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Reverse-mode tape.  Each op records its output value plus a closure that
// scatters the output's gradient into the inputs' gradients.  backward() runs
// the closures newest-to-oldest, so parameter leaves (registered first)
// receive their gradients last.
class Tape {
 public:
  Var push(Mat value) {
    nodes_.push_back({std::move(value), Mat(), nullptr});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  void hook(Var v, std::function<void()> back) { nodes_[v.id].back = std::move(back); }

  const Mat& val(Var v) const { return nodes_[v.id].value; }
  Mat& grad(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // Seeds d(loss)/d(loss) = 1 and runs the recorded closures in reverse.
  void backward(Var loss) {
    if (val(loss).size() != 1) throw std::logic_error("backward needs a scalar loss");
    grad(loss)(0, 0) += 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.back && n.grad.size() != 0) n.back();
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;  // lazily sized on first touch
    std::function<void()> back;
  };
  std::deque<Node> nodes_;
};

// ---- leaves ----------------------------------------------------------------

inline Var input(Tape& t, Mat v) { return t.push(std::move(v)); }

// Parameter leaf: on backward, adds the node gradient into *sink.
inline Var param_leaf(Tape& t, const Mat& value, Mat* sink) {
  Var v = t.push(value);
  t.hook(v, [&t, v, sink] { *sink += t.grad(v); });
  return v;
}

// ---- elementwise / linear ops ----------------------------------------------

inline void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::logic_error(std::string(op) + ": shape mismatch");
}

inline Var add(Var a, Var b) {
  Tape& t = *a.tape;
  check_same_shape(t.val(a), t.val(b), "add");
  Var out = t.push(t.val(a) + t.val(b));
  t.hook(out, [&t, out, a, b] {
    t.grad(a) += t.grad(out);
    t.grad(b) += t.grad(out);
  });
  return out;
}

inline Var sub(Var a, Var b) {
  Tape& t = *a.tape;
  check_same_shape(t.val(a), t.val(b), "sub");
  Var out = t.push(t.val(a) - t.val(b));
  t.hook(out, [&t, out, a, b] {
    t.grad(a) += t.grad(out);
    t.grad(b) -= t.grad(out);
  });
  return out;
}

inline Var mul(Var a, Var b) {  // elementwise
  Tape& t = *a.tape;
  check_same_shape(t.val(a), t.val(b), "mul");
  Var out = t.push(t.val(a).cwiseProduct(t.val(b)));
  t.hook(out, [&t, out, a, b] {
    t.grad(a) += t.grad(out).cwiseProduct(t.val(b));
    t.grad(b) += t.grad(out).cwiseProduct(t.val(a));
  });
  return out;
}

inline Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Var out = t.push(t.val(a) * s);
  t.hook(out, [&t, out, a, s] { t.grad(a) += t.grad(out) * s; });
  return out;
}

inline Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  if (t.val(a).cols() != t.val(b).rows()) throw std::logic_error("matmul: inner dim mismatch");
  Var out = t.push(t.val(a) * t.val(b));
  t.hook(out, [&t, out, a, b] {
    t.grad(a) += t.grad(out) * t.val(b).transpose();
    t.grad(b) += t.val(a).transpose() * t.grad(out);
  });
  return out;
}

// y = H^T u  (columns of H scored against u)
inline Var mat_t_vec(Var h, Var u) {
  Tape& t = *h.tape;
  if (t.val(h).rows() != t.val(u).rows()) throw std::logic_error("mat_t_vec: dim mismatch");
  Var out = t.push(t.val(h).transpose() * t.val(u));
  t.hook(out, [&t, out, h, u] {
    t.grad(h) += t.val(u) * t.grad(out).transpose();
    t.grad(u) += t.val(h) * t.grad(out);
  });
  return out;
}

inline Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat: no parts");
  Tape& t = *parts[0].tape;
  Eigen::Index rows = 0;
  for (Var p : parts) rows += t.val(p).rows();
  Mat v(rows, 1);
  Eigen::Index at = 0;
  for (Var p : parts) {
    v.block(at, 0, t.val(p).rows(), 1) = t.val(p);
    at += t.val(p).rows();
  }
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, parts] {
    Eigen::Index at = 0;
    for (Var p : parts) {
      t.grad(p) += t.grad(out).block(at, 0, t.val(p).rows(), 1);
      at += t.val(p).rows();
    }
  });
  return out;
}

// column j of a matrix, as a vector (embedding lookup)
inline Var col(Var m, Eigen::Index j) {
  Tape& t = *m.tape;
  Var out = t.push(t.val(m).col(j));
  t.hook(out, [&t, out, m, j] { t.grad(m).col(j) += t.grad(out); });
  return out;
}

inline Var slice(Var a, Eigen::Index off, Eigen::Index len) {
  Tape& t = *a.tape;
  Var out = t.push(t.val(a).block(off, 0, len, 1));
  t.hook(out, [&t, out, a, off, len] { t.grad(a).block(off, 0, len, 1) += t.grad(out); });
  return out;
}

// matrix whose columns are the given vectors
inline Var stack_cols(const std::vector<Var>& cols) {
  if (cols.empty()) throw std::logic_error("stack_cols: no columns");
  Tape& t = *cols[0].tape;
  Eigen::Index rows = t.val(cols[0]).rows();
  Mat v(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) v.col(j) = t.val(cols[j]);
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, cols] {
    for (std::size_t j = 0; j < cols.size(); ++j)
      t.grad(cols[j]) += t.grad(out).col(static_cast<Eigen::Index>(j));
  });
  return out;
}

// ---- nonlinearities ----------------------------------------------------------

inline Var tanh_v(Var a) {
  Tape& t = *a.tape;
  Var out = t.push(t.val(a).array().tanh().matrix());
  t.hook(out, [&t, out, a] {
    t.grad(a) += t.grad(out).cwiseProduct(
        (1.0 - t.val(out).array().square()).matrix());
  });
  return out;
}

inline Var sigmoid_v(Var a) {
  Tape& t = *a.tape;
  Var out = t.push((1.0 / (1.0 + (-t.val(a)).array().exp())).matrix());
  t.hook(out, [&t, out, a] {
    t.grad(a) += t.grad(out).cwiseProduct(
        (t.val(out).array() * (1.0 - t.val(out).array())).matrix());
  });
  return out;
}

inline Var log_v(Var a) {
  Tape& t = *a.tape;
  Var out = t.push(t.val(a).array().log().matrix());
  t.hook(out, [&t, out, a] {
    t.grad(a) += t.grad(out).cwiseQuotient(t.val(a));
  });
  return out;
}

inline Var exp_v(Var a) {
  Tape& t = *a.tape;
  Var out = t.push(t.val(a).array().exp().matrix());
  t.hook(out, [&t, out, a] { t.grad(a) += t.grad(out).cwiseProduct(t.val(out)); });
  return out;
}

// ---- reductions / distributions ---------------------------------------------

inline Var dot(Var a, Var b) {
  Tape& t = *a.tape;
  check_same_shape(t.val(a), t.val(b), "dot");
  Mat v(1, 1);
  v(0, 0) = t.val(a).cwiseProduct(t.val(b)).sum();
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, a, b] {
    double g = t.grad(out)(0, 0);
    t.grad(a) += g * t.val(b);
    t.grad(b) += g * t.val(a);
  });
  return out;
}

inline Var vsum(Var a) {
  Tape& t = *a.tape;
  Mat v(1, 1);
  v(0, 0) = t.val(a).sum();
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, a] {
    t.grad(a).array() += t.grad(out)(0, 0);
  });
  return out;
}

inline Var pick(Var a, Eigen::Index i) {
  Tape& t = *a.tape;
  Mat v(1, 1);
  v(0, 0) = t.val(a)(i, 0);
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, a, i] { t.grad(a)(i, 0) += t.grad(out)(0, 0); });
  return out;
}

inline Var softmax_v(Var a) {
  Tape& t = *a.tape;
  Eigen::ArrayXd e = (t.val(a).array() - t.val(a).maxCoeff()).exp();
  Var out = t.push((e / e.sum()).matrix());
  t.hook(out, [&t, out, a] {
    const Mat& p = t.val(out);
    double inner = t.grad(out).cwiseProduct(p).sum();
    t.grad(a) += p.cwiseProduct(t.grad(out)) - p * inner;
  });
  return out;
}

// Log-softmax over the unmasked entries only; masked entries come out as
// -inf so exp() of the result puts exactly zero mass there.
inline Var masked_log_softmax(Var a, const std::vector<char>& mask) {
  Tape& t = *a.tape;
  const Mat& x = t.val(a);
  if (static_cast<std::size_t>(x.rows()) != mask.size())
    throw std::logic_error("masked_log_softmax: mask length mismatch");
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (mask[i]) {
      hi = std::max(hi, x(i, 0));
      any = true;
    }
  if (!any) throw std::logic_error("masked_log_softmax: empty support");
  double total = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (mask[i]) total += std::exp(x(i, 0) - hi);
  double lse = hi + std::log(total);
  Mat v(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    v(i, 0) = mask[i] ? x(i, 0) - lse : -std::numeric_limits<double>::infinity();
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, a, mask] {
    const Mat& lp = t.val(out);
    const Mat& g = t.grad(out);
    double gsum = 0;
    for (Eigen::Index i = 0; i < lp.rows(); ++i)
      if (mask[i]) gsum += g(i, 0);
    for (Eigen::Index i = 0; i < lp.rows(); ++i)
      if (mask[i]) t.grad(a)(i, 0) += g(i, 0) - std::exp(lp(i, 0)) * gsum;
  });
  return out;
}

inline Var log_softmax(Var a) {
  return masked_log_softmax(a, std::vector<char>(a.tape->val(a).rows(), 1));
}

inline Var logsumexp_v(Var a) {
  Tape& t = *a.tape;
  double hi = t.val(a).maxCoeff();
  double lse = hi + std::log((t.val(a).array() - hi).exp().sum());
  Mat v(1, 1);
  v(0, 0) = lse;
  Var out = t.push(std::move(v));
  t.hook(out, [&t, out, a] {
    double g = t.grad(out)(0, 0);
    t.grad(a) += g * (t.val(a).array() - t.val(out)(0, 0)).exp().matrix();
  });
  return out;
}

// Inverted-scaling dropout on a vector; identity when rate = 0 or !train.
inline Var dropout(Var a, double rate, util::Rng& rng, bool train) {
  if (!train || rate <= 0.0) return a;
  Tape& t = *a.tape;
  Mat mask(t.val(a).rows(), 1);
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    mask(i, 0) = rng.uniform() < rate ? 0.0 : 1.0 / (1.0 - rate);
  Var out = t.push(t.val(a).cwiseProduct(mask));
  t.hook(out, [&t, out, a, mask] { t.grad(a) += t.grad(out).cwiseProduct(mask); });
  return out;
}

}  // namespace sempar::nn
