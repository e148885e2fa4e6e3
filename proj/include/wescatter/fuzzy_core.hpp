/**
 * Fuzzy inference kernel.
 *
 * Rules carry no premise clouds: membership is read off the consequent
 * hyperplanes themselves.  A rule's affinity to a sample is the point-to-
 * hyperplane distance between the extended input and the rule's class
 * hyperplane, squashed through a normalised exponential so the closest rule
 * always fires at exp(-gamma) or better.  Classification runs one such
 * profile per class column and defuzzifies each column separately.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/matrix.hpp"

namespace wsn {

struct Rule {
  Matrix w;                       // (u+1) x O consequent, one hyperplane per class
  double support = 1.0;           // samples won while this rule was closest
  Matrix omega;                   // (u+1) x (u+1) inverse-correlation correction
  Matrix anchor_w;                // last trusted weights; pseudo updates pull here
  std::uint64_t birth_index = 0;  // learner-local sample counter at creation
  double firing_sum = 0.0;        // accumulated max-class firing since birth
};

// Input vector with the bias slot prepended: x_e = [1, x_1 .. x_u].
struct ExtendedInput {
  std::vector<double> v;

  static ExtendedInput from_features(const std::vector<double>& x) {
    ExtendedInput e;
    e.v.reserve(x.size() + 1);
    e.v.push_back(1.0);
    e.v.insert(e.v.end(), x.begin(), x.end());
    return e;
  }
  std::size_t features() const { return v.size() - 1; }
};

// Teacher-forcing signal: the one-hot label on even training positions, the
// previous prediction everywhere else.
struct TargetSignal {
  std::vector<double> v;
};

std::vector<double> uniform_prior(std::size_t n_classes);

// |signal_o - x_e . W[:,o]| / sqrt(1 + sum_j W[j,o]^2)
double hyperplane_distance(const ExtendedInput& x, const Rule& rule,
                           const TargetSignal& signal, std::size_t class_index);

// h_i = exp(-gamma * d_i / max_i d_i); an all-zero distance vector means every
// rule sits on the target hyperplane, so everything fires fully.
std::vector<double> firing_strengths(const std::vector<double>& distances, double gamma);

// Defuzzified outputs for all classes under a single shared firing profile.
std::vector<double> local_output(const ExtendedInput& x, const std::vector<Rule>& rules,
                                 const std::vector<double>& h);

// One class column under its own firing profile.
double weighted_class_output(const ExtendedInput& x, const std::vector<Rule>& rules,
                             const std::vector<double>& h, std::size_t class_index);

// Ratio of the top defuzzified score to the top-two mass; degenerate mass
// collapses to maximal uncertainty 0.5.
double confidence(const std::vector<double>& y_hat);

struct InferenceResult {
  std::vector<double> scores;  // one defuzzified score per class
  double max_firing = 0.0;     // max over rules and classes, the compatibility statistic
};

// Full per-class inference: class o is scored under the firing profile induced
// by its own distance column.
InferenceResult infer(const ExtendedInput& x, const std::vector<Rule>& rules,
                      const TargetSignal& signal, double gamma);

}  // namespace wsn
