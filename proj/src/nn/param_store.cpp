#include "sempar/nn/param_store.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sempar/util/text.hpp"

namespace sempar::nn {

Mat& ParamStore::add(const std::string& name, Eigen::Index rows,
                     Eigen::Index cols, double scale, util::Rng& rng) {
  if (entries_.count(name)) throw std::logic_error("parameter already exists: " + name);
  Entry e;
  e.value = Mat(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      e.value(i, j) = rng.uniform(-scale, scale);
  e.grad = Mat::Zero(rows, cols);
  e.m = Mat::Zero(rows, cols);
  e.v = Mat::Zero(rows, cols);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Mat& ParamStore::add_zeros(const std::string& name, Eigen::Index rows,
                           Eigen::Index cols) {
  if (entries_.count(name)) throw std::logic_error("parameter already exists: " + name);
  Entry e;
  e.value = Mat::Zero(rows, cols);
  e.grad = Mat::Zero(rows, cols);
  e.m = Mat::Zero(rows, cols);
  e.v = Mat::Zero(rows, cols);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Mat& ParamStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::logic_error("unknown parameter: " + name);
  return it->second.value;
}

const Mat& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::logic_error("unknown parameter: " + name);
  return it->second.value;
}

Mat& ParamStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::logic_error("unknown parameter: " + name);
  return it->second.grad;
}

Var ParamStore::leaf(Tape& t, const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::logic_error("unknown parameter: " + name);
  return param_leaf(t, it->second.value, &it->second.grad);
}

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) e.grad.setZero();
}

double ParamStore::grad_norm() const {
  double sq = 0;
  for (const auto& [name, e] : entries_) sq += e.grad.squaredNorm();
  return std::sqrt(sq);
}

void ParamStore::clip_grads(double max_norm) {
  double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  double s = max_norm / norm;
  for (auto& [name, e] : entries_) e.grad *= s;
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  ++adam_t_;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
  for (auto& [name, e] : entries_) {
    e.m = beta1 * e.m + (1.0 - beta1) * e.grad;
    e.v = beta2 * e.v + (1.0 - beta2) * e.grad.cwiseProduct(e.grad).eval();
    Mat mhat = e.m / bc1;
    Mat vhat = e.v / bc2;
    e.value.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  }
}

void ParamStore::sgd_step(double lr) {
  for (auto& [name, e] : entries_) e.value -= lr * e.grad;
}

void ParamStore::check_finite() const {
  for (const auto& [name, e] : entries_) {
    if (!e.value.allFinite()) throw std::runtime_error("non-finite value in parameter " + name);
    if (!e.grad.allFinite()) throw std::runtime_error("non-finite gradient in parameter " + name);
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

std::size_t ParamStore::total_coords() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

void ParamStore::save(std::ostream& out) const {
  out << "params " << entries_.size() << "\n";
  for (const auto& [name, e] : entries_) {
    out << "param " << name << " " << e.value.rows() << " " << e.value.cols() << "\n";
    for (Eigen::Index i = 0; i < e.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < e.value.cols(); ++j) {
        if (j) out << " ";
        out << util::fmt_double(e.value(i, j));
      }
      out << "\n";
    }
  }
}

ParamStore ParamStore::load(std::istream& in) {
  ParamStore store;
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "params")
    throw std::runtime_error("parameter block: expected 'params <count>' header");
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "param")
      throw std::runtime_error("parameter block: malformed 'param' line");
    Entry e;
    e.value = Mat(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        if (!(in >> e.value(i, j)))
          throw std::runtime_error("parameter block: truncated values for " + name);
    e.grad = Mat::Zero(rows, cols);
    e.m = Mat::Zero(rows, cols);
    e.v = Mat::Zero(rows, cols);
    store.entries_.emplace(name, std::move(e));
  }
  return store;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (entries_.size() != other.entries_.size())
    throw std::logic_error("copy_values_from: store shapes differ");
  auto it = entries_.begin();
  auto jt = other.entries_.begin();
  for (; it != entries_.end(); ++it, ++jt) {
    if (it->first != jt->first || it->second.value.rows() != jt->second.value.rows() ||
        it->second.value.cols() != jt->second.value.cols())
      throw std::logic_error("copy_values_from: store shapes differ at " + it->first);
    it->second.value = jt->second.value;
  }
}

}  // namespace sempar::nn
