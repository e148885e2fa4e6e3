#include "wescatter/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wsn {

double sim_distance(const Rule& a, const Rule& b, std::size_t class_index) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.w.rows(); ++j) {
    const double wa = a.w(j, class_index);
    const double wb = b.w(j, class_index);
    num += (wa - wb) * (wa - wb);
    den += (wa + wb) * (wa + wb);
  }
  num = std::sqrt(num);
  den = std::sqrt(den);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

double sim_angle(const Rule& a, const Rule& b, std::size_t class_index) {
  // Extended normals [W, -1] and [-W', 1]; identical hyperplanes come out
  // antiparallel, phi = pi, similarity 1.
  double ab = -1.0, aa = 1.0, bb = 1.0;
  for (std::size_t j = 0; j < a.w.rows(); ++j) {
    const double wa = a.w(j, class_index);
    const double wb = b.w(j, class_index);
    ab += wa * -wb;
    aa += wa * wa;
    bb += wb * wb;
  }
  const double cosine = std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
  return std::acos(cosine) / 3.14159265358979323846;
}

double sim_distance_avg(const Rule& a, const Rule& b) {
  double s = 0.0;
  for (std::size_t o = 0; o < a.w.cols(); ++o) s += sim_distance(a, b, o);
  return s / static_cast<double>(a.w.cols());
}

double sim_angle_avg(const Rule& a, const Rule& b) {
  double s = 0.0;
  for (std::size_t o = 0; o < a.w.cols(); ++o) s += sim_angle(a, b, o);
  return s / static_cast<double>(a.w.cols());
}

std::vector<ScoredRule> extract_rules(const std::vector<TrainedPartition>& parts) {
  std::vector<ScoredRule> out;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const std::vector<Rule>& rules = parts[p].learner.rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      ScoredRule sr;
      sr.rule = rules[i];
      sr.train_accuracy = i < parts[p].rule_accuracies.size() ? parts[p].rule_accuracies[i] : 0.0;
      sr.source_partition = p;
      out.push_back(std::move(sr));
    }
  }
  return out;
}

std::vector<ScoredRule> eliminate_minor_rules(std::vector<ScoredRule> rules, double floor) {
  if (rules.size() <= 1) return rules;
  double total = 0.0;
  for (const auto& r : rules) total += r.rule.support;
  const double cutoff = floor * total;

  std::vector<ScoredRule> kept;
  for (auto& r : rules)
    if (r.rule.support >= cutoff) kept.push_back(std::move(r));
  if (!kept.empty()) return kept;

  std::size_t best = 0;
  for (std::size_t i = 1; i < rules.size(); ++i)
    if (rules[i].rule.support > rules[best].rule.support) best = i;
  kept.push_back(rules[best]);
  return kept;
}

std::vector<Rule> merge_models(const std::vector<ScoredRule>& sorted_rules, std::size_t z,
                               const FusionConfig& cfg) {
  const std::size_t n = sorted_rules.size();
  z = std::min(z, n);

  std::vector<Rule> dominant;
  dominant.reserve(z);
  for (std::size_t i = 0; i < z; ++i) dominant.push_back(sorted_rules[i].rule);
  std::vector<double> absorbed(dominant.size(), 1.0);

  std::vector<Rule> retained;
  for (std::size_t c = z; c < n; ++c) {
    const Rule& cand = sorted_rules[c].rule;
    std::size_t target = 0;
    double best_sim1 = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < dominant.size(); ++d) {
      const double s1 = sim_distance_avg(cand, dominant[d]);
      if (s1 < best_sim1) {  // ties keep the earlier-ranked dominant
        best_sim1 = s1;
        target = d;
      }
    }
    const bool gate = !dominant.empty() && best_sim1 <= cfg.k4 &&
                      sim_angle_avg(cand, dominant[target]) >= cfg.k5;
    if (!gate) {
      retained.push_back(cand);
      continue;
    }
    Rule& dom = dominant[target];
    if (!(cand.w == dom.w)) {
      // Support-weighted convex combination; the bitwise-equal case above
      // skips the arithmetic so duplicate absorption is exact.
      const double sd = dom.support, sc = cand.support;
      for (std::size_t j = 0; j < dom.w.rows(); ++j)
        for (std::size_t o = 0; o < dom.w.cols(); ++o)
          dom.w(j, o) = (sd * dom.w(j, o) + sc * cand.w(j, o)) / (sd + sc);
    }
    dom.support += cand.support;
    dom.firing_sum += cand.firing_sum;
    absorbed[target] += 1.0;
  }

  // Constituents are mostly slice-trained copies of the same inherited rule,
  // so their support and firing mass describe overlapping populations. The
  // per-constituent mean keeps both on the one-learner scale; summing would
  // multiply the inherited base by the partition count at every fusion and
  // the firing ratio in the anchored update diverges within a dozen batches.
  for (std::size_t d = 0; d < dominant.size(); ++d) {
    dominant[d].support /= absorbed[d];
    dominant[d].firing_sum /= absorbed[d];
  }

  for (auto& r : retained) dominant.push_back(std::move(r));
  return dominant;
}

std::size_t pick_best(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[best]) best = i;  // strict: equal scores keep the smaller Z
  return best;
}

double candidate_score(const std::vector<Rule>& rules, const std::vector<ProbeSample>& probes,
                       const std::vector<double>& mu_e, std::size_t n_classes, double gamma) {
  if (rules.empty()) return std::numeric_limits<double>::infinity();

  const ExpectedOutput eo = expected_output(rules, mu_e);
  const double r = static_cast<double>(rules.size());

  double bias_sum = 0.0, var_sum = 0.0;
  std::size_t correct = 0;
  const std::vector<double> prior = uniform_prior(n_classes);
  for (const auto& probe : probes) {
    double bias = 0.0, var = 0.0;
    for (std::size_t o = 0; o < n_classes; ++o) {
      const double ey = eo.total[o] / r;
      const double target = o == probe.label ? 1.0 : 0.0;
      bias += (target - ey) * (target - ey);
      var += ey * ey - ey * ey;  // i.i.d. shortcut: E[y^2] = E[y]*E[y]
    }
    bias_sum += bias;
    var_sum += var;

    const ExtendedInput xe = ExtendedInput::from_features(probe.x);
    const InferenceResult res = infer(xe, rules, TargetSignal{prior}, gamma);
    std::size_t arg = 0;
    for (std::size_t o = 1; o < res.scores.size(); ++o)
      if (res.scores[o] > res.scores[arg]) arg = o;
    if (arg == probe.label) ++correct;
  }
  const double inv = 1.0 / static_cast<double>(probes.size());
  const double acc = static_cast<double>(correct) * inv;
  if (acc == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(bias_sum * inv * (var_sum * inv)) / acc;
}

BaseLearner fuse(const std::vector<TrainedPartition>& parts,
                 const std::vector<ProbeSample>& b_sample, const FusionConfig& cfg) {
  std::vector<ScoredRule> scored = eliminate_minor_rules(extract_rules(parts), cfg.support_floor);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredRule& a, const ScoredRule& b) {
                     return a.train_accuracy > b.train_accuracy;
                   });

  BaseLearner fused = parts.front().learner;  // partition 0 donates the auxiliary state

  std::vector<std::vector<Rule>> candidates;
  candidates.reserve(cfg.z_candidates.size());
  for (std::size_t z : cfg.z_candidates) candidates.push_back(merge_models(scored, z, cfg));

  std::size_t choice = 0;
  if (b_sample.empty()) {
    choice = 0;  // no probes anywhere: smallest Z wins by default
  } else {
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
      scores[i] = candidate_score(candidates[i], b_sample, fused.forgetting().mu,
                                  fused.n_classes(), fused.config().gamma);
    choice = pick_best(scores);
  }
  fused.rules() = std::move(candidates[choice]);
  return fused;
}

}  // namespace wsn
