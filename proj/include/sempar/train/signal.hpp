#pragma once

namespace sempar::train {

// One latent sample's learning signal and its ingredients:
//   raw l' = log_rec - lambda * (log_q - log_prior)
//   l      = max(l' - baseline, clip_threshold)
struct LearningSignalRecord {
  double log_q = 0;      // log q(z | x) under the inference model
  double log_rec = 0;    // log p(x | z) under the reconstruction model
  double log_prior = 0;  // log p(z)
  double raw_signal = 0; // l'
  double baseline = 0;   // b(x)
  double signal = 0;     // l
  bool clipped = false;  // the clamp bound the value
};

// Pure arithmetic; throws std::invalid_argument when any input is non-finite
// (an infinitely-bad prior or reconstruction score means the sample should
// have been rejected upstream, not averaged into a gradient).
LearningSignalRecord learning_signal(double log_q, double log_rec, double log_prior,
                                     double baseline, double lambda, double clip_threshold);

}  // namespace sempar::train
