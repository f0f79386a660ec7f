#pragma once

#include <string>
#include <vector>

#include "sempar/nn/prior.hpp"
#include "sempar/train/baseline.hpp"
#include "sempar/train/config.hpp"
#include "sempar/train/estimator.hpp"

namespace sempar::eval {

// One latent sample of one diagnosed utterance.
struct SampleDiagnostics {
  double signal = 0;  // clipped, baseline-adjusted learning signal l
  double log_q = 0;
  bool is_gold = false;  // exact match against the utterance's gold tree
  bool clipped = false;
};

struct UtteranceDiagnostics {
  std::vector<std::string> x;
  std::vector<SampleDiagnostics> samples;  // search order
  bool gold_in_samples = false;
  int gold_rank = 0;              // 1-based by signal (1 + #strictly greater); 0 if absent
  double gold_signal = 0;         // meaningful only when gold_in_samples
  double best_other_signal = 0;   // NaN when every sample is gold
  bool skipped = false;           // search failed; excluded from aggregates
};

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  int gold_count = 0;
  int other_count = 0;
};

// Signal statistics over a diagnosis set, restricted to utterances whose
// sample set contains the gold tree.
struct DiagnosticsRecord {
  std::vector<UtteranceDiagnostics> utterances;
  int considered = 0;             // utterances with gold in the sample set
  std::vector<int> rank_counts;   // index r-1 = #considered utterances with gold rank r
  double gold_rank1_fraction = 0; // among considered
  double mean_gold = 0;           // gold-sample signals over considered utterances
  double var_gold = 0;            // population variance
  double mean_other = 0;          // all non-gold sample signals, same restriction
  double var_other = 0;
  double mean_gap_rank1 = 0;      // mean gold - best other, where gold ranks first
  std::vector<HistogramBin> histogram;  // 12 equal-width bins over all signals
  std::string to_text() const;
};

// Read-only pass: beam-searches S(x) of cfg.sample_size per example, scores
// each sample's learning signal with the baseline as-is (no refit, no
// gradients), and aggregates over the utterances whose S(x) contains gold.
DiagnosticsRecord signal_report(const train::ParserModels& m, const nn::PriorModel& prior,
                                const train::Baseline& baseline,
                                const std::vector<train::TrainExample>& diag,
                                const train::TrainerConfig& cfg);

}  // namespace sempar::eval
