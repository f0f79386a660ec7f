#include "sempar/train/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sempar::train {

LearningSignalRecord learning_signal(double log_q, double log_rec, double log_prior,
                                     double baseline, double lambda, double clip_threshold) {
  auto require_finite = [](double v, const char* what) {
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string("learning_signal: non-finite ") + what);
  };
  require_finite(log_q, "log_q");
  require_finite(log_rec, "log_rec");
  require_finite(log_prior, "log_prior");
  require_finite(baseline, "baseline");

  LearningSignalRecord r;
  r.log_q = log_q;
  r.log_rec = log_rec;
  r.log_prior = log_prior;
  r.baseline = baseline;
  r.raw_signal = log_rec - lambda * (log_q - log_prior);
  double adjusted = r.raw_signal - baseline;
  r.clipped = adjusted < clip_threshold;
  r.signal = r.clipped ? clip_threshold : adjusted;
  return r;
}

}  // namespace sempar::train
