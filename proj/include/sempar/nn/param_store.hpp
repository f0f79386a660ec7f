#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sempar/nn/tensor.hpp"
#include "sempar/util/rng.hpp"

namespace sempar::nn {

// Named dense parameters with their gradients and Adam moments.  Iteration is
// always in sorted name order so training runs are reproducible.
class ParamStore {
 public:
  struct Entry {
    Mat value;
    Mat grad;
    Mat m;  // Adam first moment
    Mat v;  // Adam second moment
  };

  // Creates a parameter initialized uniformly in [-scale, scale].
  Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols,
           double scale, util::Rng& rng);
  Mat& add_zeros(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  Mat& value(const std::string& name);
  const Mat& value(const std::string& name) const;
  Mat& grad(const std::string& name);

  // Tape leaf whose backward pass accumulates into this store's gradient.
  Var leaf(Tape& t, const std::string& name);

  void zero_grads();
  double grad_norm() const;
  // Scales all gradients down so their global L2 norm is at most max_norm.
  void clip_grads(double max_norm);

  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);
  void sgd_step(double lr);

  // Throws if any parameter or gradient contains NaN/inf.
  void check_finite() const;

  std::vector<std::string> names() const;
  std::size_t total_coords() const;

  // Text round-trip: "param <name> <rows> <cols>" then row-major values.
  void save(std::ostream& out) const;
  static ParamStore load(std::istream& in);

  // Copies values (not optimizer state) from another store with identical shape.
  void copy_values_from(const ParamStore& other);

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
  long adam_t_ = 0;
};

}  // namespace sempar::nn
