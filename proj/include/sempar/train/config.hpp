#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace sempar::train {

// Knobs for the supervised / semi-supervised training loops.  Defaults follow
// the reference configuration; everything is addressable from the key=value
// config file under the [trainer] section.
struct TrainerConfig {
  double alpha = 0.1;            // weight of the unsupervised objective
  double kl_weight = 0.1;        // lambda on the KL term in the lower bound
  int sample_size = 5;           // |S(x)| latent samples per utterance
  double clip_threshold = -20.0; // learning signals are clamped up to this
  int batch_sup = 10;
  int batch_unsup = 25;
  double learning_rate = 1e-3;   // Adam; halved on each reload
  int patience = 5;              // stagnant dev epochs before reload+halve
  int reload_cycles = 5;         // reload+halve repetitions before stopping
  int max_epochs = 60;           // per-phase safety cap
  std::uint64_t seed = 1;

  // Baseline b(x) = a * log p_LM(x) + c initialization.  two_stage_baseline
  // starts from the generic (1.0, 0.0) instead of the task-tuned values.
  double baseline_a_init = 0.5;
  double baseline_c_init = -2.0;
  bool two_stage_baseline = false;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;

  // Overrides fields present in kv (keys "<prefix>name", e.g. "trainer.alpha").
  void apply(const std::map<std::string, std::string>& kv,
             const std::string& prefix = "trainer.");
};

}  // namespace sempar::train
