/**
 * Driver/worker execution of the per-batch passes.  Work splits into P
 * contiguous partitions handed to a small thread pool; results land in
 * per-partition slots, so the outcome is a pure function of the inputs and P
 * regardless of how many workers run or how they are scheduled.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "wescatter/ensemble.hpp"
#include "wescatter/fusion.hpp"

namespace wsn {

struct PartitionPlan {
  // Half-open [begin, end) ranges, contiguous, sizes differing by at most 1.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t count() const { return ranges.size(); }
};

// P is clamped to the sample count; the first T mod P partitions take the
// extra sample.
PartitionPlan make_partitions(std::size_t total, std::size_t p);

struct TestPassResult {
  // predictions[sample][learner] is that learner's score vector.
  std::vector<std::vector<std::vector<double>>> predictions;
  std::vector<double> betas;  // partition-mean vote tracks
};

// Prequential test pass: every learner predicts every sample under a
// partition-local teacher-forcing carry, and each partition evolves its own
// copy of the voting weights from the batch-start snapshot.  Throws
// std::runtime_error if any worker fails or produces non-finite scores.
TestPassResult test_distributed(const Ensemble& ens, const PartitionPlan& plan,
                                const std::vector<std::vector<double>>& features,
                                std::size_t worker_count);

// Partition-parallel training: each partition clones the seed learner, runs
// the full evolving pipeline over its slice, and reports per-rule solo
// accuracies.  A partition whose model goes non-finite is retried once from
// the seed; a second failure throws.
std::vector<TrainedPartition> train_distributed(const BaseLearner& seed,
                                                const std::vector<TrainingSample>& samples,
                                                std::size_t p, std::size_t worker_count,
                                                bool pseudo_anchoring);

}  // namespace wsn
