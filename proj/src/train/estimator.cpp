#include "sempar/train/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sempar/transition/oracle.hpp"

namespace sempar::train {

using nn::Tape;
using nn::Var;

TrainExample make_train_example(const asdl::AsdlGrammar& g, mr::MrKind kind,
                                std::vector<std::string> x, asdl::Ast z) {
  TrainExample e;
  e.actions = transition::ast_to_actions(g, z);  // validates conformance
  e.mr = mr::linearize(g, z, kind);
  e.x = std::move(x);
  e.z = std::move(z);
  return e;
}

ParserModels::ParserModels(const nn::ModelConfig& cfg, const asdl::AsdlGrammar& g,
                           mr::MrKind kind, util::Rng& init_rng)
    : config(cfg), kind(kind), inference(cfg, g), reconstruction(cfg) {
  inference.init(inf_store, init_rng);
  reconstruction.init(rec_store, init_rng);
}

double supervised_step(ParserModels& m, const std::vector<const TrainExample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("supervised_step: empty batch");
  Tape tape;
  std::vector<Var> terms;
  terms.reserve(batch.size() * 2);
  for (const TrainExample* e : batch) {
    terms.push_back(m.inference.log_prob_var(tape, m.inf_store, e->x, e->actions));
    terms.push_back(m.reconstruction.log_prob_var(tape, m.rec_store, e->x, e->mr));
  }
  Var loss = nn::scale(nn::vsum(nn::concat(terms)), -1.0);
  tape.backward(loss);
  return tape.val(loss)(0, 0);
}

namespace {

struct ScoredSample {
  asdl::Ast ast;
  double log_q = 0;       // exact inference log-probability
  double weight = 0;      // w_i in the estimator
  mr::LinearMR mr;
  double log_rec = 0;
  double log_prior = 0;
};

// Draws S(x) and fills per-sample scores; returns false when nothing usable.
bool draw_samples(ParserModels& m, const std::vector<std::string>& x,
                  const nn::PriorModel& prior, const TrainerConfig& cfg, SampleMode mode,
                  util::Rng& rng, std::vector<ScoredSample>& out, int& dropped) {
  std::vector<nn::ScoredAst> raw;
  switch (mode) {
    case SampleMode::Beam: {
      try {
        nn::SampleSet s = m.inference.beam_search(m.inf_store, x, cfg.sample_size);
        raw.assign(s.begin(), s.end());
      } catch (const std::runtime_error&) {
        return false;  // no hypothesis completed: skip this utterance
      }
      break;
    }
    case SampleMode::Ancestral: {
      for (int i = 0; i < cfg.sample_size; ++i) {
        try {
          raw.push_back(m.inference.sample(m.inf_store, x, rng));
        } catch (const std::runtime_error&) {
          ++dropped;
        }
      }
      break;
    }
    case SampleMode::ExactSupport: {
      ParserModels& mm = m;
      nn::SampleSet s = enumerate_support(mm, x, 256);
      raw.assign(s.begin(), s.end());
      break;
    }
  }
  if (raw.empty()) return false;

  const double uniform_w = 1.0 / static_cast<double>(raw.size());
  for (nn::ScoredAst& sa : raw) {
    ScoredSample s;
    s.log_q = sa.score;
    s.weight = mode == SampleMode::ExactSupport ? std::exp(sa.score) : uniform_w;
    try {
      s.mr = mr::linearize(m.grammar(), sa.ast, m.kind);
      s.log_rec = m.reconstruction.log_prob(m.rec_store, x, s.mr).log_prob;
      s.log_prior = prior.log_prob(s.mr);
    } catch (const std::exception&) {
      ++dropped;  // unprintable tree or non-finite component
      continue;
    }
    if (!std::isfinite(s.log_rec) || !std::isfinite(s.log_prior) || !std::isfinite(s.log_q)) {
      ++dropped;
      continue;
    }
    s.ast = std::move(sa.ast);
    out.push_back(std::move(s));
  }
  return !out.empty();
}

}  // namespace

UnsupOutcome unsupervised_step(ParserModels& m,
                               const std::vector<const std::vector<std::string>*>& batch,
                               const nn::PriorModel& prior, Baseline& baseline,
                               const TrainerConfig& cfg, double weight, SampleMode mode,
                               util::Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("unsupervised_step: empty batch");
  UnsupOutcome out;
  std::vector<std::pair<const std::vector<std::string>*, double>> baseline_observations;

  Tape tape;
  std::vector<Var> weighted_terms;

  for (const std::vector<std::string>* x : batch) {
    std::vector<ScoredSample> samples;
    if (!draw_samples(m, *x, prior, cfg, mode, rng, samples, out.dropped_samples)) {
      ++out.skipped;
      continue;
    }
    const double b = baseline.value(*x);
    std::vector<LearningSignalRecord> recs;
    nn::SampleSet kept;
    recs.reserve(samples.size());
    for (ScoredSample& s : samples) {
      LearningSignalRecord r =
          learning_signal(s.log_q, s.log_rec, s.log_prior, b, cfg.kl_weight, cfg.clip_threshold);
      baseline_observations.emplace_back(x, r.raw_signal);

      // phi: -weight * w_i * l_i * log q;  theta: -weight * w_i * log rec
      Var log_q = m.inference.log_prob_var(tape, m.inf_store, *x,
                                           transition::ast_to_actions(m.grammar(), s.ast));
      weighted_terms.push_back(nn::scale(log_q, -weight * s.weight * r.signal));
      Var log_rec = m.reconstruction.log_prob_var(tape, m.rec_store, *x, s.mr);
      weighted_terms.push_back(nn::scale(log_rec, -weight * s.weight));

      out.objective += weight * s.weight * r.raw_signal;
      kept.push_back({std::move(s.ast), s.log_q});
      recs.push_back(r);
    }
    out.records.push_back(std::move(recs));
    out.samples.push_back(std::move(kept));
    out.utterances.push_back(x);
  }

  if (!weighted_terms.empty()) {
    Var loss = nn::vsum(nn::concat(weighted_terms));
    tape.backward(loss);
  }
  baseline.fit_batch(baseline_observations);
  return out;
}

nn::SampleSet enumerate_support(const ParserModels& m, const std::vector<std::string>& x,
                                int max_support) {
  nn::SampleSet s = m.inference.beam_search(m.inf_store, x, max_support);
  double mass = 0;
  for (const nn::ScoredAst& a : s) mass += std::exp(a.score);
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::runtime_error("enumerate_support: support not fully enumerated (mass " +
                             std::to_string(mass) + " over " + std::to_string(s.size()) +
                             " derivations; raise max_support)");
  return s;
}

double elbo_from_components(const std::vector<ElboComponent>& items, double lambda) {
  double total = 0;
  for (const ElboComponent& c : items)
    total += c.weight * (c.log_rec - lambda * (c.log_q - c.log_prior));
  return total;
}

namespace {

ElboComponent component_for(const ParserModels& m, const std::vector<std::string>& x,
                            const nn::PriorModel& prior, const asdl::Ast& z, double log_q,
                            double weight) {
  ElboComponent c;
  c.weight = weight;
  c.log_q = log_q;
  mr::LinearMR lin = mr::linearize(m.grammar(), z, m.kind);
  c.log_rec = m.reconstruction.log_prob(m.rec_store, x, lin).log_prob;
  c.log_prior = prior.log_prob(lin);
  return c;
}

}  // namespace

double elbo_estimate(const ParserModels& m, const std::vector<std::string>& x,
                     const nn::PriorModel& prior, double lambda, int n_samples, util::Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("elbo_estimate: n_samples must be >= 1");
  std::vector<ElboComponent> items;
  items.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    nn::ScoredAst s = m.inference.sample(m.inf_store, x, rng);
    items.push_back(component_for(m, x, prior, s.ast, s.score, 1.0 / n_samples));
  }
  return elbo_from_components(items, lambda);
}

double elbo_exact(const ParserModels& m, const std::vector<std::string>& x,
                  const nn::PriorModel& prior, double lambda, int max_support) {
  nn::SampleSet support = enumerate_support(m, x, max_support);
  std::vector<ElboComponent> items;
  items.reserve(support.size());
  for (const nn::ScoredAst& s : support)
    items.push_back(component_for(m, x, prior, s.ast, s.score, std::exp(s.score)));
  return elbo_from_components(items, lambda);
}

double marginal_log_likelihood(const ParserModels& m, const std::vector<std::string>& x,
                               const nn::PriorModel& prior, int max_support) {
  nn::SampleSet support = enumerate_support(m, x, max_support);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> joints;
  joints.reserve(support.size());
  for (const nn::ScoredAst& s : support) {
    mr::LinearMR lin = mr::linearize(m.grammar(), s.ast, m.kind);
    double j = prior.log_prob(lin) + m.reconstruction.log_prob(m.rec_store, x, lin).log_prob;
    joints.push_back(j);
    best = std::max(best, j);
  }
  if (!std::isfinite(best)) return best;
  double acc = 0;
  for (double j : joints) acc += std::exp(j - best);
  return best + std::log(acc);
}

}  // namespace sempar::train
