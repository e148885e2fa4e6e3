#include "wescatter/runtime.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>

namespace wsn {

PartitionPlan make_partitions(std::size_t total, std::size_t p) {
  PartitionPlan plan;
  if (total == 0) return plan;
  p = std::max<std::size_t>(1, std::min(p, total));
  const std::size_t base = total / p;
  const std::size_t rem = total % p;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t size = base + (i < rem ? 1 : 0);
    plan.ranges.emplace_back(begin, begin + size);
    begin += size;
  }
  return plan;
}

namespace {

// Run task(p) for every partition on min(worker_count, P) threads.  The
// first captured exception (lowest partition index) is rethrown on the
// caller's thread.
void run_partitioned(std::size_t partitions, std::size_t worker_count,
                     const std::function<void(std::size_t)>& task) {
  if (partitions == 0) return;
  const std::size_t threads = std::max<std::size_t>(1, std::min(worker_count, partitions));
  std::vector<std::exception_ptr> errors(partitions);

  if (threads == 1) {
    for (std::size_t p = 0; p < partitions; ++p) {
      try {
        task(p);
      } catch (...) {
        errors[p] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t p = next.fetch_add(1);
          if (p >= partitions) return;
          try {
            task(p);
          } catch (...) {
            errors[p] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool finite_scores(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

TestPassResult test_distributed(const Ensemble& ens, const PartitionPlan& plan,
                                const std::vector<std::vector<double>>& features,
                                std::size_t worker_count) {
  TestPassResult result;
  const std::size_t m = ens.learners.size();
  result.predictions.assign(features.size(), {});
  std::vector<std::vector<double>> vote_tracks(plan.count());

  run_partitioned(plan.count(), worker_count, [&](std::size_t p) {
    const auto [begin, end] = plan.ranges[p];
    std::vector<std::vector<double>> carries(m, uniform_prior(ens.n_classes));
    std::vector<double> track = ens.betas;  // batch-start snapshot
    for (std::size_t i = begin; i < end; ++i) {
      auto& row = result.predictions[i];
      row.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const InferenceResult res = ens.learners[j].predict(features[i], carries[j]);
        if (!finite_scores(res.scores))
          throw std::runtime_error("test pass produced non-finite scores");
        track[j] = compatibility_and_vote_update(track[j], res.max_firing, ens.fac);
        carries[j] = res.scores;
        row[j] = res.scores;
      }
    }
    vote_tracks[p] = std::move(track);
  });

  result.betas = aggregate_partition_votes(vote_tracks);
  return result;
}

std::vector<TrainedPartition> train_distributed(const BaseLearner& seed,
                                                const std::vector<TrainingSample>& samples,
                                                std::size_t p, std::size_t worker_count,
                                                bool pseudo_anchoring) {
  const PartitionPlan plan = make_partitions(samples.size(), p);
  std::vector<TrainedPartition> out(plan.count());

  run_partitioned(plan.count(), worker_count, [&](std::size_t part) {
    const auto [begin, end] = plan.ranges[part];
    const std::vector<TrainingSample> slice(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                            samples.begin() + static_cast<std::ptrdiff_t>(end));
    for (int attempt = 0; attempt < 2; ++attempt) {
      BaseLearner model = seed;
      model.train_partition(slice, pseudo_anchoring);
      if (model.finite()) {
        out[part].rule_accuracies = model.rule_accuracies(slice);
        out[part].learner = std::move(model);
        return;
      }
    }
    throw std::runtime_error("partition training diverged twice; batch aborted");
  });
  return out;
}

}  // namespace wsn
