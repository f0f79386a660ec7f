#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sempar/train/estimator.hpp"

namespace sempar::train {

// One epoch's record in the training history.  Serialized as one
// line-delimited key=value record per epoch.
struct EpochRecord {
  int epoch = 0;            // 1-based, continuous across phases
  std::string phase;        // pretrain | semisup | finetune
  double sup_loss = 0;      // mean supervised loss per labeled example
  double unsup_objective = std::numeric_limits<double>::quiet_NaN();
  double dev_accuracy = 0;
  double mean_signal_gold = std::numeric_limits<double>::quiet_NaN();
  double mean_signal_other = std::numeric_limits<double>::quiet_NaN();
  double learning_rate = 0;
  int skipped_unsup = 0;

  std::string to_line() const;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  double best_dev_accuracy = 0;
  int best_epoch = 0;

  std::string to_text() const;  // one line per epoch plus a final best= line
};

// Beam-1 exact-match accuracy (failed parses count as mismatches).
double evaluate_accuracy(const ParserModels& m, const std::vector<TrainExample>& dev);

// Supervised training with early stopping: after `patience` epochs without a
// dev improvement the best parameters are reloaded and the learning rate is
// halved, `reload_cycles` times; the best parameters are restored at the end.
TrainHistory train_supervised(ParserModels& m, const std::vector<TrainExample>& train,
                              const std::vector<TrainExample>& dev, const TrainerConfig& cfg);

// Phase 1: supervised pre-training on the labeled set (as train_supervised).
// Phase 2: alternating supervised batches (batch_sup) and score-function
// unsupervised batches (batch_unsup, weight alpha) under the same early
// stopping.  With alpha == 0 or no unlabeled data, phase 2 degenerates to
// supervised continuation and consumes the identical RNG stream, so a
// supervised-only run with the same seed is reproduced exactly.
// unlabeled_gold, when given, provides gold trees for diagnostics only
// (per-epoch mean signal of gold vs non-gold samples); it never feeds
// gradients.
TrainHistory train_semisup(ParserModels& m, const std::vector<TrainExample>& labeled,
                           const std::vector<TrainExample>& dev,
                           const std::vector<std::vector<std::string>>& unlabeled,
                           const nn::PriorModel* prior, Baseline* baseline,
                           const TrainerConfig& cfg,
                           const std::vector<TrainExample>* unlabeled_gold = nullptr);

struct SelfTrainResult {
  TrainHistory history;
  int pseudo_examples = 0;  // predicted pairs added
  int skipped = 0;          // unlabeled utterances with no parse
};

// Supervised training, then beam-1 prediction on unlabeled utterances not in
// the labeled set, then supervised fine-tuning on the union.  No pseudo
// examples -> no fine-tuning steps (the model is left unchanged).
SelfTrainResult self_train(ParserModels& m, const std::vector<TrainExample>& labeled,
                           const std::vector<TrainExample>& dev,
                           const std::vector<std::vector<std::string>>& unlabeled,
                           const TrainerConfig& cfg);

}  // namespace sempar::train
