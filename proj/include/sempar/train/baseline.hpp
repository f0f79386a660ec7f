#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sempar/nn/token_lm.hpp"

namespace sempar::train {

// Input-dependent control value b(x) subtracted from the raw learning signal
// to reduce the variance of the score-function estimator.
class Baseline {
 public:
  virtual ~Baseline() = default;

  virtual double value(const std::vector<std::string>& x) const = 0;

  // Least-squares refit from one batch of (utterance, raw signal l') pairs.
  virtual void fit_batch(
      const std::vector<std::pair<const std::vector<std::string>*, double>>& observations) = 0;
};

// b(x) = a * log p_LM(x) + c over a pre-trained, frozen utterance language
// model; a and c are refit in closed form on every unsupervised batch.
class LmBaseline : public Baseline {
 public:
  LmBaseline(const nn::TokenLm* lm, double a, double c);

  double value(const std::vector<std::string>& x) const override;
  void fit_batch(const std::vector<std::pair<const std::vector<std::string>*, double>>&
                     observations) override;

  double a() const { return a_; }
  double c() const { return c_; }
  void set(double a, double c) {
    a_ = a;
    c_ = c;
  }

 private:
  const nn::TokenLm* lm_;  // frozen; not owned
  double a_;
  double c_;
};

// b(x) = w . f(x) + bias over a feature vector (the utterance encoder's final
// hidden state); bias starts at -20 so early signals are not swamped, weights
// start at zero.  Refit by ridge-damped least squares per batch.
class MlpBaseline : public Baseline {
 public:
  using FeatureFn = std::function<Eigen::VectorXd(const std::vector<std::string>&)>;

  MlpBaseline(int feature_dim, FeatureFn features, double bias_init = -20.0);

  double value(const std::vector<std::string>& x) const override;
  void fit_batch(const std::vector<std::pair<const std::vector<std::string>*, double>>&
                     observations) override;

  int feature_dim() const { return static_cast<int>(w_.size()); }
  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return bias_; }

 private:
  FeatureFn features_;
  Eigen::VectorXd w_;
  double bias_;
};

// Fixed value; keeps tests and the alpha=0 degenerate path honest.
class ConstantBaseline : public Baseline {
 public:
  explicit ConstantBaseline(double value) : value_(value) {}
  double value(const std::vector<std::string>&) const override { return value_; }
  void fit_batch(
      const std::vector<std::pair<const std::vector<std::string>*, double>>&) override {}

 private:
  double value_;
};

}  // namespace sempar::train
