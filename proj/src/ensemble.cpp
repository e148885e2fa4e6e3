#include "wescatter/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wsn {

namespace {
constexpr double kFiringThreshold = 0.6065306597126334;  // exp(-0.5)
}

double compatibility_and_vote_update(double beta, double max_firing, double fac) {
  if (max_firing >= kFiringThreshold) return std::min(beta * (1.0 + fac), 1.0);
  return std::max(beta * fac, std::numeric_limits<double>::min());
}

std::vector<double> aggregate_partition_votes(
    const std::vector<std::vector<double>>& per_partition) {
  std::vector<double> out;
  if (per_partition.empty()) return out;
  out.assign(per_partition.front().size(), 0.0);
  for (const auto& track : per_partition)
    for (std::size_t m = 0; m < track.size(); ++m) out[m] += track[m];
  for (double& b : out) b /= static_cast<double>(per_partition.size());
  return out;
}

EnsembleOutput ensemble_output(const std::vector<std::vector<double>>& per_learner,
                               const std::vector<double>& betas) {
  EnsembleOutput out;
  if (per_learner.empty()) return out;
  out.scores.assign(per_learner.front().size(), 0.0);
  for (std::size_t m = 0; m < per_learner.size(); ++m)
    for (std::size_t o = 0; o < out.scores.size(); ++o)
      out.scores[o] += betas[m] * per_learner[m][o];
  for (std::size_t o = 1; o < out.scores.size(); ++o)
    if (out.scores[o] > out.scores[out.label]) out.label = o;
  return out;
}

double hoeffding_epsilon(std::size_t size, double cut_fraction, std::size_t T, double delta,
                         double a, double b) {
  if (b <= a) return 0.0;
  const double cut_count = cut_fraction * static_cast<double>(T);
  return (b - a) * std::sqrt(static_cast<double>(size) / (2.0 * cut_count * static_cast<double>(T)) *
                             std::log(1.0 / delta));
}

DriftVerdict detect_drift(const std::vector<double>& statistics, double delta, double a, double b) {
  DriftVerdict verdict;
  const std::size_t T = statistics.size();
  if (T < 8) return verdict;

  std::vector<double> prefix_sum(T + 1, 0.0);
  for (std::size_t i = 0; i < T; ++i) prefix_sum[i + 1] = prefix_sum[i] + statistics[i];
  const double full_mean = prefix_sum[T] / static_cast<double>(T);

  constexpr double kCuts[] = {0.25, 0.5, 0.75};
  bool any = false;
  double best_gap = 0.0, best_cut = 0.0, best_eps = 0.0;
  for (double cut : kCuts) {
    const std::size_t na = static_cast<std::size_t>(cut * static_cast<double>(T));
    if (na == 0 || na >= T) continue;
    const double mean_a = prefix_sum[na] / static_cast<double>(na);
    const double mean_c = (prefix_sum[T] - prefix_sum[na]) / static_cast<double>(T - na);
    const double eps_a = hoeffding_epsilon(na, cut, T, delta, a, b);
    const double eps_x = hoeffding_epsilon(T, cut, T, delta, a, b);
    if (!(full_mean + eps_x <= mean_a + eps_a)) continue;  // switching condition
    const double gap = std::fabs(mean_a - mean_c);
    const double eps_c = hoeffding_epsilon(T - na, cut, T, delta, a, b);
    const double eps_ac = std::max(eps_a, eps_c);
    if (!any || gap > best_gap) {
      any = true;
      best_gap = gap;
      best_cut = cut;
      best_eps = eps_ac;
    }
  }
  if (!any) return verdict;

  verdict.cut_fraction = best_cut;
  verdict.statistic_gap = best_gap;
  verdict.epsilon = best_eps;
  // With a zero observed range both bounds collapse to zero and the test
  // cannot separate anything; rounding noise in the prefix sums must not
  // promote an all-equal batch to drift.
  if (best_gap >= best_eps && best_eps > 0.0) verdict.status = DriftStatus::drift;
  return verdict;
}

std::vector<std::size_t> prune_learners(Ensemble& ens) {
  std::vector<std::size_t> removed;
  const std::size_t m = ens.learners.size();
  if (m < 2) return removed;

  double mean = 0.0;
  for (double b : ens.betas) mean += b;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double b : ens.betas) var += (b - mean) * (b - mean);
  var /= static_cast<double>(m);
  const double threshold = mean - std::sqrt(var);

  std::vector<std::uint8_t> keep(m, 1);
  std::size_t kept = m;
  for (std::size_t i = 0; i < m; ++i)
    if (ens.betas[i] <= threshold) {
      keep[i] = 0;
      --kept;
    }
  if (kept == 0) {
    // Equal weights push everyone under the gate; retain the single best.
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (ens.betas[i] > ens.betas[best]) best = i;
    keep[best] = 1;
  }

  std::vector<BaseLearner> learners;
  std::vector<double> betas;
  for (std::size_t i = 0; i < m; ++i) {
    if (keep[i]) {
      learners.push_back(std::move(ens.learners[i]));
      betas.push_back(ens.betas[i]);
    } else {
      removed.push_back(i);
    }
  }
  ens.learners = std::move(learners);
  ens.betas = std::move(betas);
  return removed;
}

std::size_t winning_learner(const Ensemble& ens) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ens.betas.size(); ++i)
    if (ens.betas[i] > ens.betas[best]) best = i;
  return best;
}

void integrate_model(Ensemble& ens, BaseLearner fused, std::size_t winner_index,
                     DriftStatus status) {
  if (status == DriftStatus::drift || ens.learners.empty()) {
    ens.learners.push_back(std::move(fused));
    ens.betas.push_back(1.0);
  } else {
    ens.learners[winner_index] = std::move(fused);
  }
}

}  // namespace wsn
