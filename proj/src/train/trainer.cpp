#include "sempar/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "sempar/eval/metrics.hpp"
#include "sempar/util/text.hpp"

namespace sempar::train {

namespace {

constexpr double kGradClipNorm = 5.0;

std::string utterance_key(const std::vector<std::string>& x) {
  return util::join(x, "\x1f");
}

std::string fmt_or_nan(double v) {
  return std::isnan(v) ? "nan" : util::fmt_double(v);
}

}  // namespace

std::string EpochRecord::to_line() const {
  std::string s;
  s += "epoch=" + std::to_string(epoch);
  s += " phase=" + phase;
  s += " sup_loss=" + fmt_or_nan(sup_loss);
  s += " unsup_objective=" + fmt_or_nan(unsup_objective);
  s += " dev_accuracy=" + fmt_or_nan(dev_accuracy);
  s += " mean_signal_gold=" + fmt_or_nan(mean_signal_gold);
  s += " mean_signal_other=" + fmt_or_nan(mean_signal_other);
  s += " learning_rate=" + fmt_or_nan(learning_rate);
  s += " skipped_unsup=" + std::to_string(skipped_unsup);
  return s;
}

std::string TrainHistory::to_text() const {
  std::string s;
  for (const EpochRecord& r : epochs) s += r.to_line() + "\n";
  s += "best_epoch=" + std::to_string(best_epoch) +
       " best_dev_accuracy=" + fmt_or_nan(best_dev_accuracy) + "\n";
  return s;
}

double evaluate_accuracy(const ParserModels& m, const std::vector<TrainExample>& dev) {
  if (dev.empty()) return 0.0;
  int matches = 0;
  for (const TrainExample& e : dev) {
    try {
      nn::SampleSet top = m.inference.beam_search(m.inf_store, e.x, 1);
      if (!top.empty() &&
          eval::exact_match(m.grammar(), top.front().ast, e.z, m.kind)) {
        ++matches;
      }
    } catch (const std::runtime_error&) {
      // no complete hypothesis: counts as a mismatch
    }
  }
  return static_cast<double>(matches) / static_cast<double>(dev.size());
}

namespace {

struct Snapshot {
  nn::ParamStore inf;
  nn::ParamStore rec;
};

Snapshot take_snapshot(const ParserModels& m) { return {m.inf_store, m.rec_store}; }

void restore_snapshot(ParserModels& m, const Snapshot& s) {
  m.inf_store = s.inf;
  m.rec_store = s.rec;
}

// Cycles through the unlabeled pool in shuffled order, reshuffling on wrap.
class UnlabeledCursor {
 public:
  UnlabeledCursor(const std::vector<std::vector<std::string>>& pool, util::Rng& rng)
      : pool_(pool), rng_(rng) {}

  bool active() const { return !pool_.empty(); }

  std::vector<const std::vector<std::string>*> next_batch(int size) {
    std::vector<const std::vector<std::string>*> batch;
    int want = std::min<int>(size, static_cast<int>(pool_.size()));
    while (static_cast<int>(batch.size()) < want) {
      if (pos_ >= order_.size()) {
        order_.resize(pool_.size());
        for (std::size_t i = 0; i < pool_.size(); ++i) order_[i] = i;
        rng_.shuffle(order_);
        pos_ = 0;
      }
      batch.push_back(&pool_[order_[pos_++]]);
    }
    return batch;
  }

 private:
  const std::vector<std::vector<std::string>>& pool_;
  util::Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// One phase of early-stopped training.  run_epoch trains a full epoch at the
// given learning rate and fills the record's statistics.
void run_phase(ParserModels& m, const std::string& phase_name,
               const std::function<void(double, EpochRecord&)>& run_epoch,
               const std::vector<TrainExample>& dev, const TrainerConfig& cfg,
               TrainHistory& hist, int& epoch_counter) {
  Snapshot best = take_snapshot(m);
  double best_acc = evaluate_accuracy(m, dev);
  double lr = cfg.learning_rate;
  int stagnant = 0;
  int reloads = 0;

  for (int e = 0; e < cfg.max_epochs; ++e) {
    EpochRecord rec;
    rec.epoch = ++epoch_counter;
    rec.phase = phase_name;
    rec.learning_rate = lr;
    run_epoch(lr, rec);
    rec.dev_accuracy = evaluate_accuracy(m, dev);
    hist.epochs.push_back(rec);

    if (rec.dev_accuracy > best_acc + 1e-12) {
      best_acc = rec.dev_accuracy;
      best = take_snapshot(m);
      stagnant = 0;
      if (best_acc > hist.best_dev_accuracy) {
        hist.best_dev_accuracy = best_acc;
        hist.best_epoch = rec.epoch;
      }
    } else if (++stagnant >= cfg.patience) {
      if (++reloads > cfg.reload_cycles) break;
      restore_snapshot(m, best);
      lr *= 0.5;
      stagnant = 0;
    }
  }
  restore_snapshot(m, best);
  if (hist.best_dev_accuracy < best_acc) {
    hist.best_dev_accuracy = best_acc;
  }
}

}  // namespace

TrainHistory train_semisup(ParserModels& m, const std::vector<TrainExample>& labeled,
                           const std::vector<TrainExample>& dev,
                           const std::vector<std::vector<std::string>>& unlabeled,
                           const nn::PriorModel* prior, Baseline* baseline,
                           const TrainerConfig& cfg,
                           const std::vector<TrainExample>* unlabeled_gold) {
  cfg.validate();
  if (labeled.empty()) throw std::invalid_argument("train_semisup: empty labeled set");
  if (dev.empty()) throw std::invalid_argument("train_semisup: empty dev set");
  const bool unsup_active =
      cfg.alpha > 0 && !unlabeled.empty() && prior != nullptr && baseline != nullptr;

  // Gold lookup for diagnostics only.
  std::map<std::string, const TrainExample*> gold_by_utterance;
  if (unlabeled_gold != nullptr) {
    for (const TrainExample& e : *unlabeled_gold) gold_by_utterance[utterance_key(e.x)] = &e;
  }

  util::Rng rng(cfg.seed);
  TrainHistory hist;
  int epoch_counter = 0;

  std::vector<const TrainExample*> order(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) order[i] = &labeled[i];

  auto sup_epoch_loss = [&](double lr) {
    rng.shuffle(order);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_sup) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_sup);
      std::vector<const TrainExample*> batch(order.begin() + start, order.begin() + stop);
      m.inf_store.zero_grads();
      m.rec_store.zero_grads();
      total += supervised_step(m, batch);
      m.inf_store.clip_grads(kGradClipNorm);
      m.rec_store.clip_grads(kGradClipNorm);
      m.inf_store.adam_step(lr);
      m.rec_store.adam_step(lr);
    }
    return total / static_cast<double>(labeled.size());
  };

  // Phase 1: supervised pre-training.
  run_phase(
      m, "pretrain", [&](double lr, EpochRecord& rec) { rec.sup_loss = sup_epoch_loss(lr); },
      dev, cfg, hist, epoch_counter);

  // Phase 2: alternating supervised and (when active) unsupervised batches.
  UnlabeledCursor cursor(unlabeled, rng);
  auto phase2_epoch = [&](double lr, EpochRecord& rec) {
    rng.shuffle(order);
    double sup_total = 0;
    double unsup_total = 0;
    int unsup_batches = 0;
    double gold_sum = 0, other_sum = 0;
    int gold_n = 0, other_n = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_sup) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_sup);
      std::vector<const TrainExample*> batch(order.begin() + start, order.begin() + stop);
      m.inf_store.zero_grads();
      m.rec_store.zero_grads();
      sup_total += supervised_step(m, batch);
      m.inf_store.clip_grads(kGradClipNorm);
      m.rec_store.clip_grads(kGradClipNorm);
      m.inf_store.adam_step(lr);
      m.rec_store.adam_step(lr);

      if (!unsup_active) continue;
      std::vector<const std::vector<std::string>*> ubatch = cursor.next_batch(cfg.batch_unsup);
      m.inf_store.zero_grads();
      m.rec_store.zero_grads();
      UnsupOutcome out = unsupervised_step(m, ubatch, *prior, *baseline, cfg, cfg.alpha,
                                           SampleMode::Beam, rng);
      m.inf_store.clip_grads(kGradClipNorm);
      m.rec_store.clip_grads(kGradClipNorm);
      m.inf_store.adam_step(lr);
      m.rec_store.adam_step(lr);
      unsup_total += out.objective;
      ++unsup_batches;
      rec.skipped_unsup += out.skipped;

      for (std::size_t u = 0; u < out.records.size(); ++u) {
        auto it = gold_by_utterance.find(utterance_key(*out.utterances[u]));
        if (it == gold_by_utterance.end()) continue;
        for (std::size_t i = 0; i < out.records[u].size(); ++i) {
          bool is_gold = eval::exact_match(m.grammar(), out.samples[u][i].ast,
                                           it->second->z, m.kind);
          if (is_gold) {
            gold_sum += out.records[u][i].signal;
            ++gold_n;
          } else {
            other_sum += out.records[u][i].signal;
            ++other_n;
          }
        }
      }
    }
    rec.sup_loss = sup_total / static_cast<double>(labeled.size());
    if (unsup_batches > 0) rec.unsup_objective = unsup_total / unsup_batches;
    if (gold_n > 0) rec.mean_signal_gold = gold_sum / gold_n;
    if (other_n > 0) rec.mean_signal_other = other_sum / other_n;
  };
  run_phase(m, unsup_active ? "semisup" : "continue", phase2_epoch, dev, cfg, hist,
            epoch_counter);
  return hist;
}

TrainHistory train_supervised(ParserModels& m, const std::vector<TrainExample>& train,
                              const std::vector<TrainExample>& dev, const TrainerConfig& cfg) {
  return train_semisup(m, train, dev, {}, nullptr, nullptr, cfg, nullptr);
}

SelfTrainResult self_train(ParserModels& m, const std::vector<TrainExample>& labeled,
                           const std::vector<TrainExample>& dev,
                           const std::vector<std::vector<std::string>>& unlabeled,
                           const TrainerConfig& cfg) {
  SelfTrainResult result;
  result.history = train_supervised(m, labeled, dev, cfg);

  std::map<std::string, bool> in_labeled;
  for (const TrainExample& e : labeled) in_labeled[utterance_key(e.x)] = true;

  std::vector<TrainExample> augmented = labeled;
  std::map<std::string, bool> predicted;  // dedupe repeated unlabeled utterances
  for (const std::vector<std::string>& x : unlabeled) {
    std::string key = utterance_key(x);
    if (in_labeled.count(key) || predicted.count(key)) continue;
    predicted[key] = true;
    try {
      nn::SampleSet top = m.inference.beam_search(m.inf_store, x, 1);
      augmented.push_back(make_train_example(m.grammar(), m.kind, x, top.front().ast));
      ++result.pseudo_examples;
    } catch (const std::exception&) {
      ++result.skipped;
    }
  }
  if (result.pseudo_examples == 0) return result;  // nothing to fine-tune on

  util::Rng rng(cfg.seed + 1);
  TrainHistory fine;
  int epoch_counter = static_cast<int>(result.history.epochs.size());
  std::vector<const TrainExample*> order(augmented.size());
  for (std::size_t i = 0; i < augmented.size(); ++i) order[i] = &augmented[i];
  run_phase(
      m, "finetune",
      [&](double lr, EpochRecord& rec) {
        rng.shuffle(order);
        double total = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_sup) {
          std::size_t stop = std::min(order.size(), start + cfg.batch_sup);
          std::vector<const TrainExample*> batch(order.begin() + start, order.begin() + stop);
          m.inf_store.zero_grads();
          m.rec_store.zero_grads();
          total += supervised_step(m, batch);
          m.inf_store.clip_grads(kGradClipNorm);
          m.rec_store.clip_grads(kGradClipNorm);
          m.inf_store.adam_step(lr);
          m.rec_store.adam_step(lr);
        }
        rec.sup_loss = total / static_cast<double>(augmented.size());
      },
      dev, cfg, fine, epoch_counter);
  for (EpochRecord& r : fine.epochs) result.history.epochs.push_back(r);
  if (fine.best_dev_accuracy > result.history.best_dev_accuracy) {
    result.history.best_dev_accuracy = fine.best_dev_accuracy;
    result.history.best_epoch = fine.best_epoch;
  }
  return result;
}

}  // namespace sempar::train
