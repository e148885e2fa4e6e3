/**
 * Self-evolving base model: a flat fuzzy rule set trained sample by sample
 * under teacher forcing, growing and pruning rules through the network-
 * significance gates and moving consequents with the recursive estimator.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/da3.hpp"
#include "wescatter/rule_evolution.hpp"

namespace wsn {

class BaseLearner {
 public:
  BaseLearner() = default;
  BaseLearner(std::size_t n_features, std::size_t n_classes, const LearnerConfig& cfg);

  // Inference under the caller's teacher-forcing carry (the previous
  // prediction, uniform at a partition start).
  InferenceResult predict(const std::vector<double>& x, const std::vector<double>& carry) const;

  // Consume one partition's assembled training block in order.  With
  // pseudo_anchoring off, pseudo samples take the plain consequent update
  // instead of the anchored one.
  void train_partition(const std::vector<TrainingSample>& samples, bool pseudo_anchoring);

  // Solo accuracy of each rule's hyperplanes over the given samples.
  std::vector<double> rule_accuracies(const std::vector<TrainingSample>& samples) const;

  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<Rule>& rules() { return rules_; }
  const NsState& ns() const { return ns_; }
  NsState& ns() { return ns_; }
  const ForgettingState& forgetting() const { return forgetting_; }
  ForgettingState& forgetting() { return forgetting_; }
  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }
  const LearnerConfig& config() const { return cfg_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_classes() const { return n_classes_; }

  bool finite() const;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_classes_ = 0;
  LearnerConfig cfg_;
  std::vector<Rule> rules_;
  NsState ns_;
  ForgettingState forgetting_;
  std::uint64_t steps_ = 0;  // learner-local sample counter
};

}  // namespace wsn
