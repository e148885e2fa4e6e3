/**
 * Data-free model fusion: pull the rules out of the partition-trained
 * models, drop the negligible ones, merge near-duplicates into a dominant
 * set of Z rules by hyperplane geometry, and pick Z with a tiny labelled
 * probe set.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/learner.hpp"

namespace wsn {

struct TrainedPartition {
  BaseLearner learner;
  std::vector<double> rule_accuracies;  // solo accuracy per rule on this partition's samples
};

struct ScoredRule {
  Rule rule;
  double train_accuracy = 0.0;
  std::size_t source_partition = 0;
};

struct FusionConfig {
  double k4 = 0.4;            // max hyperplane distance for a merge
  double k5 = 0.6;            // min dihedral similarity for a merge
  double support_floor = 0.02;
  std::vector<std::size_t> z_candidates{3, 5, 8, 10};  // ascending
};

// Normalised hyperplane distance of one class column; 0/0 collapses to 0 and
// a vanishing denominator with signal returns +inf, which never merges.
double sim_distance(const Rule& a, const Rule& b, std::size_t class_index);

// Dihedral similarity of the extended normals [W,-1] and [-W',1] in [0,1];
// identical hyperplanes score 1.
double sim_angle(const Rule& a, const Rule& b, std::size_t class_index);

double sim_distance_avg(const Rule& a, const Rule& b);
double sim_angle_avg(const Rule& a, const Rule& b);

// Partition-major rule extraction with per-rule accuracies attached.
std::vector<ScoredRule> extract_rules(const std::vector<TrainedPartition>& parts);

// Drop rules whose support falls under floor * total; the strongest rule
// always survives.
std::vector<ScoredRule> eliminate_minor_rules(std::vector<ScoredRule> rules, double floor);

// Top-Z dominant set plus absorption of the remaining candidates.  A
// candidate joins the dominant of minimum average distance when the gate
// sim1 <= k4 && sim2 >= k5 holds there; bitwise-identical consequents merge
// without arithmetic so exact duplicates stay exact.  Failing candidates are
// kept as extra rules.
std::vector<Rule> merge_models(const std::vector<ScoredRule>& sorted_rules, std::size_t z,
                               const FusionConfig& cfg);

struct ProbeSample {
  std::vector<double> x;
  std::size_t label = 0;
};

// argmin over candidate scores; equal scores prefer the smaller Z (entries
// are ascending in Z).
std::size_t pick_best(const std::vector<double>& scores);

// Score one fused candidate on the probe set: |mean bias * mean var| / acc,
// +inf when it classifies nothing correctly.
double candidate_score(const std::vector<Rule>& rules, const std::vector<ProbeSample>& probes,
                       const std::vector<double>& mu_e, std::size_t n_classes, double gamma);

// Full fusion pass over the trained partitions.  The fused learner's
// auxiliary state (significance gates, forgetting mean, step counter) comes
// from partition 0, the same model a single-node run would produce.
BaseLearner fuse(const std::vector<TrainedPartition>& parts,
                 const std::vector<ProbeSample>& b_sample, const FusionConfig& cfg);

}  // namespace wsn
