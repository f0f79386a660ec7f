#include "sempar/train/baseline.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace sempar::train {

LmBaseline::LmBaseline(const nn::TokenLm* lm, double a, double c) : lm_(lm), a_(a), c_(c) {
  if (lm_ == nullptr) throw std::invalid_argument("LmBaseline: null language model");
}

double LmBaseline::value(const std::vector<std::string>& x) const {
  return a_ * lm_->sequence_log_prob(x) + c_;
}

void LmBaseline::fit_batch(
    const std::vector<std::pair<const std::vector<std::string>*, double>>& observations) {
  if (observations.empty()) return;
  const double n = static_cast<double>(observations.size());
  double su = 0, st = 0, suu = 0, sut = 0;
  for (const auto& [x, target] : observations) {
    double u = lm_->sequence_log_prob(*x);
    su += u;
    st += target;
    suu += u * u;
    sut += u * target;
  }
  double var = suu - su * su / n;
  if (var > 1e-12) a_ = (sut - su * st / n) / var;
  // With a degenerate design (all log-probs equal, or a single point) only the
  // intercept is identifiable; the slope keeps its previous value.
  c_ = (st - a_ * su) / n;
}

MlpBaseline::MlpBaseline(int feature_dim, FeatureFn features, double bias_init)
    : features_(std::move(features)), w_(Eigen::VectorXd::Zero(feature_dim)), bias_(bias_init) {
  if (feature_dim < 1) throw std::invalid_argument("MlpBaseline: feature_dim must be >= 1");
  if (!features_) throw std::invalid_argument("MlpBaseline: null feature function");
}

double MlpBaseline::value(const std::vector<std::string>& x) const {
  Eigen::VectorXd f = features_(x);
  if (f.size() != w_.size())
    throw std::invalid_argument("MlpBaseline: feature dimension mismatch");
  return w_.dot(f) + bias_;
}

void MlpBaseline::fit_batch(
    const std::vector<std::pair<const std::vector<std::string>*, double>>& observations) {
  if (observations.empty()) return;
  const int d = static_cast<int>(w_.size());
  const int n = static_cast<int>(observations.size());
  Eigen::MatrixXd design(n, d + 1);  // features plus a bias column
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd f = features_(*observations[i].first);
    if (f.size() != d) throw std::invalid_argument("MlpBaseline: feature dimension mismatch");
    design.row(i).head(d) = f.transpose();
    design(i, d) = 1.0;
    target(i) = observations[i].second;
  }
  // Ridge damping keeps small batches with collinear features well-posed.
  const double damping = 1e-3;
  Eigen::MatrixXd gram =
      design.transpose() * design + damping * Eigen::MatrixXd::Identity(d + 1, d + 1);
  Eigen::VectorXd sol = gram.ldlt().solve(design.transpose() * target);
  w_ = sol.head(d);
  bias_ = sol(d);
}

}  // namespace sempar::train
