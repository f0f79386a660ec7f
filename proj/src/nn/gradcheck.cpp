#include "sempar/nn/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace sempar::nn {

GradCheckResult gradient_check(const std::function<Var(Tape&)>& build,
                               ParamStore& store, util::Rng& rng, int min_coords,
                               double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3))
    throw std::invalid_argument("epsilon must lie in [1e-6, 1e-3]");

  store.zero_grads();
  {
    Tape t;
    Var loss = build(t);
    if (!std::isfinite(t.val(loss)(0, 0))) throw std::runtime_error("non-finite loss");
    t.backward(loss);
  }
  // freeze the analytic gradients before perturbing
  std::map<std::string, Mat> analytic;
  for (const auto& [name, e] : store.entries()) analytic[name] = e.grad;

  // flat coordinate space
  struct Coord {
    std::string name;
    Eigen::Index i, j;
  };
  std::vector<Coord> coords;
  for (const auto& [name, e] : store.entries())
    for (Eigen::Index i = 0; i < e.value.rows(); ++i)
      for (Eigen::Index j = 0; j < e.value.cols(); ++j) coords.push_back({name, i, j});

  std::size_t want = std::min(coords.size(), static_cast<std::size_t>(min_coords));
  std::vector<std::size_t> chosen = rng.sample_without_replacement(coords.size(), want);

  auto loss_at = [&]() {
    Tape t;
    Var loss = build(t);
    double v = t.val(loss)(0, 0);
    if (!std::isfinite(v)) throw std::runtime_error("non-finite loss");
    return v;
  };

  GradCheckResult result;
  for (std::size_t idx : chosen) {
    const Coord& c = coords[idx];
    double& cell = store.value(c.name)(c.i, c.j);
    double saved = cell;
    cell = saved + epsilon;
    double up = loss_at();
    cell = saved - epsilon;
    double down = loss_at();
    cell = saved;
    double numeric = (up - down) / (2.0 * epsilon);
    double a = analytic[c.name](c.i, c.j);
    double rel = std::abs(a - numeric) /
                 std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > result.max_rel_err) {
      result.max_rel_err = rel;
      result.worst_param = c.name;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    ++result.coords_checked;
  }
  return result;
}

}  // namespace sempar::nn
