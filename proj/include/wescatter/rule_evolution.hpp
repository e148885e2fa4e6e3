/**
 * Structure learning for a single base model: network-significance gates that
 * grow and prune rules, the drift-scaled forgetting mean, and the recursive
 * consequent updates (with and without the pseudo-label anchor pull).
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/fuzzy_core.hpp"

namespace wsn {

struct LearnerConfig {
  double gamma = 0.7;        // firing decay
  double k3 = 0.2;           // fill value for newly grown consequents
  double omega_init = 1e5;   // initial inverse-correlation scale
  double alpha = 3e-7;       // weight-decay strength in the recursive update
  std::size_t min_rules = 1; // pruning never drops below this
};

// Running bias/variance channels with their minimum trackers.  Means and
// standard deviations are maintained recursively (Welford); the min pair of a
// channel resets to the current running values whenever a structural action
// fires, which is what keeps grow and prune from flapping on one sample.
struct NsState {
  double mean_bias = 0.0;
  double std_bias = 0.0;
  double mean_var = 0.0;
  double std_var = 0.0;
  double min_mean_bias = 0.0;
  double min_std_bias = 0.0;
  double min_mean_var = 0.0;
  double min_std_var = 0.0;
  std::uint64_t sample_count = 0;
  double m2_bias = 0.0;  // Welford sum of squared deviations
  double m2_var = 0.0;
};

enum class NsAction { none, grow, prune };

// Feed one (bias, var) observation; at most one structural action per call,
// growth checked first.  Confidence factors: k = exp(-s^2) + 1 in (1, 2],
// wide gates when the statistic is small, tight when it is large.
NsAction ns_step(NsState& ns, double bias_sample, double var_sample);

double ns_k(double s);

// Drift-scaled forgetting mean over extended inputs.  F accumulates effective
// sample mass; smaller f forgets the past faster.
struct ForgettingState {
  std::vector<double> mu;  // running mean of extended inputs, length u+1
  double F = 0.0;          // accumulated mass; first update snaps mu to x
  double f = 1.0;          // current forgetting factor
  double rate = 0.0;       // drift rate the factor was derived from
};

void forgetting_init(ForgettingState& st, std::size_t extended_dim);
void update_forgetting_mean(ForgettingState& st, const ExtendedInput& x);

struct DriftRate {
  double rate = 0.0;
  double forgetting_factor = 1.0;
};

// Total-variation distance between the two halves of a partition, averaged
// over features (10 equal histogram bins on [0, 1]); f = 1 - 0.1 * Rate.
DriftRate drift_rate(const std::vector<std::vector<double>>& features);

struct ExpectedOutput {
  Matrix per_rule;             // R x O contributions mu_e . W_i[:,o]
  std::vector<double> total;   // column sums, length O
};

ExpectedOutput expected_output(const std::vector<Rule>& rules, const std::vector<double>& mu_e);

Rule grow_rule(std::size_t n_features, std::size_t n_classes, const LearnerConfig& cfg,
               std::uint64_t birth_index);

// Remove the rule with the smallest summed contribution (lowest index on
// ties) and fold its support into the winner; if the pruned rule is the
// winner itself, the strongest-contribution survivor inherits the support.
// Never drops below cfg.min_rules.  Returns the pruned index or rules.size()
// when pruning was refused.
std::size_t prune_weakest(std::vector<Rule>& rules, const std::vector<double>& mu_e,
                          std::size_t winner_index, std::size_t min_rules);

// Recursive consequent update.  lambda is the rule's normalised firing; the
// gain and correction update run once per call, then every class column moves
// toward its target under the decayed weights.
void fwgrls_update(Rule& rule, const ExtendedInput& x, const std::vector<double>& y,
                   double lambda, double alpha);

// Pseudo-label variant: the decay pulls toward the anchor weights instead of
// zero, scaled by how much the rule actually fired since the anchor was set.
// t and t_birth are learner-local sample counters; a just-born rule divides
// by one.
void fwgrls_pseudo_update(Rule& rule, const ExtendedInput& x, const std::vector<double>& y,
                          double lambda, double alpha, std::uint64_t t);

}  // namespace wsn
