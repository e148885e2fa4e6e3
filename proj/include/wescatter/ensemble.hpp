/**
 * Ensemble bookkeeping: penalty/reward voting weights, the Hoeffding-bound
 * drift detector over per-sample covariate summaries, weight-based learner
 * pruning and the drift/stable integration rule.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/learner.hpp"

namespace wsn {

struct Ensemble {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  LearnerConfig learner_cfg;
  double fac = 0.3;    // penalty/reward factor
  double delta = 1e-3; // drift significance level
  std::vector<BaseLearner> learners;
  std::vector<double> betas;         // voting weights, one per learner, in (0,1]
  std::vector<double> input_min;     // per-feature lows seen so far (bound a)
  std::vector<double> input_max;     // per-feature highs seen so far (bound b)
};

// Reward when the strongest firing clears exp(-1/2), penalise otherwise.
// The result never leaves (0, 1]: rewards saturate at 1 and a long penalty
// streak is floored at the smallest normal double instead of underflowing
// out of the invariant.
double compatibility_and_vote_update(double beta, double max_firing, double fac);

// Mean over partition-local vote tracks, one track per partition.
std::vector<double> aggregate_partition_votes(
    const std::vector<std::vector<double>>& per_partition);

struct EnsembleOutput {
  std::vector<double> scores;
  std::size_t label = 0;
};

// Beta-weighted sum of per-learner score vectors; ties go to the lowest
// class index.
EnsembleOutput ensemble_output(const std::vector<std::vector<double>>& per_learner,
                               const std::vector<double>& betas);

// Hoeffding bound for a partition of `size` samples cut out of a T-sample
// batch at the given fraction; the cut enters as an absolute sample count.
double hoeffding_epsilon(std::size_t size, double cut_fraction, std::size_t T, double delta,
                         double a, double b);

enum class DriftStatus { stable, drift };

struct DriftVerdict {
  DriftStatus status = DriftStatus::stable;
  double cut_fraction = 0.0;  // meaningful only when status == drift or a cut satisfied
  double statistic_gap = 0.0;
  double epsilon = 0.0;
};

// Prefix/suffix test at cuts {0.25, 0.5, 0.75}.  The switching condition
// X^+eps_X <= A^+eps_A flags a mean decrease of the full batch against the
// prefix; among satisfying cuts the largest prefix/suffix gap is kept and
// drift is declared when it clears max(eps_A, eps_C).
DriftVerdict detect_drift(const std::vector<double>& statistics, double delta, double a, double b);

// Remove learners with beta <= mean - population sigma; never empties the
// ensemble (all-equal betas keep the single best learner).  Returns the
// removed indices, ascending.
std::vector<std::size_t> prune_learners(Ensemble& ens);

std::size_t winning_learner(const Ensemble& ens);

// Drift appends the freshly trained model with full voting weight; a stable
// batch replaces the winner in place, keeping its weight.
void integrate_model(Ensemble& ens, BaseLearner fused, std::size_t winner_index,
                     DriftStatus status);

}  // namespace wsn
