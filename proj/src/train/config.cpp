#include "sempar/train/config.hpp"

#include <stdexcept>

#include "sempar/util/kv_config.hpp"

namespace sempar::train {

void TrainerConfig::validate() const {
  if (alpha < 0) throw std::invalid_argument("alpha must be >= 0");
  if (kl_weight < 0) throw std::invalid_argument("kl_weight must be >= 0");
  if (sample_size < 1) throw std::invalid_argument("sample_size must be >= 1");
  if (batch_sup < 1) throw std::invalid_argument("batch_sup must be >= 1");
  if (batch_unsup < 1) throw std::invalid_argument("batch_unsup must be >= 1");
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be > 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (reload_cycles < 0) throw std::invalid_argument("reload_cycles must be >= 0");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
}

void TrainerConfig::apply(const std::map<std::string, std::string>& kv,
                          const std::string& prefix) {
  alpha = util::kv_double(kv, prefix + "alpha", alpha);
  kl_weight = util::kv_double(kv, prefix + "kl_weight", kl_weight);
  sample_size = static_cast<int>(util::kv_int(kv, prefix + "sample_size", sample_size));
  clip_threshold = util::kv_double(kv, prefix + "clip_threshold", clip_threshold);
  batch_sup = static_cast<int>(util::kv_int(kv, prefix + "batch_sup", batch_sup));
  batch_unsup = static_cast<int>(util::kv_int(kv, prefix + "batch_unsup", batch_unsup));
  learning_rate = util::kv_double(kv, prefix + "learning_rate", learning_rate);
  patience = static_cast<int>(util::kv_int(kv, prefix + "patience", patience));
  reload_cycles = static_cast<int>(util::kv_int(kv, prefix + "reload_cycles", reload_cycles));
  max_epochs = static_cast<int>(util::kv_int(kv, prefix + "max_epochs", max_epochs));
  seed = static_cast<std::uint64_t>(util::kv_int(kv, prefix + "seed", static_cast<long>(seed)));
  baseline_a_init = util::kv_double(kv, prefix + "baseline_a_init", baseline_a_init);
  baseline_c_init = util::kv_double(kv, prefix + "baseline_c_init", baseline_c_init);
  two_stage_baseline = util::kv_bool(kv, prefix + "two_stage_baseline", two_stage_baseline);
  validate();
}

}  // namespace sempar::train
