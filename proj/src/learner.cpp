#include "wescatter/learner.hpp"

#include <algorithm>
#include <cmath>

namespace wsn {

BaseLearner::BaseLearner(std::size_t n_features, std::size_t n_classes, const LearnerConfig& cfg)
    : n_features_(n_features), n_classes_(n_classes), cfg_(cfg) {
  forgetting_init(forgetting_, n_features + 1);
}

InferenceResult BaseLearner::predict(const std::vector<double>& x,
                                     const std::vector<double>& carry) const {
  const ExtendedInput xe = ExtendedInput::from_features(x);
  return infer(xe, rules_, TargetSignal{carry}, cfg_.gamma);
}

namespace {

// Per-class firing profiles for one sample; agg[i] is rule i's strongest
// class firing, the statistic that drives support, firing sums and lambdas.
struct FiringProfiles {
  std::vector<std::vector<double>> per_class;  // [class][rule]
  std::vector<double> agg;                     // [rule]
};

FiringProfiles firing_profiles(const ExtendedInput& xe, const std::vector<Rule>& rules,
                               const TargetSignal& signal, double gamma) {
  FiringProfiles fp;
  const std::size_t n_classes = signal.v.size();
  fp.per_class.assign(n_classes, {});
  fp.agg.assign(rules.size(), 0.0);
  std::vector<double> d(rules.size());
  for (std::size_t o = 0; o < n_classes; ++o) {
    for (std::size_t i = 0; i < rules.size(); ++i)
      d[i] = hyperplane_distance(xe, rules[i], signal, o);
    fp.per_class[o] = firing_strengths(d, gamma);
    for (std::size_t i = 0; i < rules.size(); ++i)
      fp.agg[i] = std::max(fp.agg[i], fp.per_class[o][i]);
  }
  return fp;
}

}  // namespace

void BaseLearner::train_partition(const std::vector<TrainingSample>& samples,
                                  bool pseudo_anchoring) {
  if (samples.empty()) return;

  std::vector<std::vector<double>> feature_rows;
  feature_rows.reserve(samples.size());
  for (const auto& s : samples) feature_rows.push_back(s.x);
  const DriftRate drift = drift_rate(feature_rows);
  forgetting_.rate = drift.rate;
  forgetting_.f = drift.forgetting_factor;

  std::vector<double> carry = uniform_prior(n_classes_);

  for (std::size_t pos = 0; pos < samples.size(); ++pos) {
    const TrainingSample& s = samples[pos];
    const ExtendedInput xe = ExtendedInput::from_features(s.x);
    // Teacher forcing feeds the membership pathway: the label on even
    // positions, the previous prediction on odd ones.  The regression target
    // and the significance statistics always use the sample's label; chasing
    // the raw carry would let the consequents reinforce their own outputs.
    const TargetSignal signal{pos % 2 == 0 ? s.y : carry};

    // Pre-update prediction; becomes the carry for the next position.  With
    // no rules yet (first ever sample) the uniform carry stays in place.
    const bool had_rules = !rules_.empty();
    const InferenceResult pre = infer(xe, rules_, signal, cfg_.gamma);

    update_forgetting_mean(forgetting_, xe);
    const std::uint64_t t = ++steps_;

    bool grew = false;
    if (rules_.empty()) {
      rules_.push_back(grow_rule(n_features_, n_classes_, cfg_, t));
      grew = true;
    } else {
      const ExpectedOutput eo = expected_output(rules_, forgetting_.mu);
      const double r = static_cast<double>(rules_.size());
      double bias_sample = 0.0;
      double var_sample = 0.0;
      for (std::size_t o = 0; o < n_classes_; ++o) {
        const double ey = eo.total[o] / r;
        const double dev = s.y[o] - ey;
        bias_sample += dev * dev;
        const double ey2 = ey * ey;       // i.i.d. shortcut: E[y^2] = E[y]*E[y]
        var_sample += ey2 - ey * ey;
      }
      const NsAction action = ns_step(ns_, bias_sample, var_sample);
      if (action == NsAction::grow) {
        rules_.push_back(grow_rule(n_features_, n_classes_, cfg_, t));
        grew = true;
      } else if (action == NsAction::prune) {
        const FiringProfiles fp = firing_profiles(xe, rules_, signal, cfg_.gamma);
        std::size_t winner = 0;
        for (std::size_t i = 1; i < rules_.size(); ++i)
          if (fp.agg[i] > fp.agg[winner]) winner = i;
        prune_weakest(rules_, forgetting_.mu, winner, cfg_.min_rules);
      }
    }

    const FiringProfiles fp = firing_profiles(xe, rules_, signal, cfg_.gamma);
    std::size_t winner = 0;
    double agg_sum = 0.0;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      if (fp.agg[i] > fp.agg[winner]) winner = i;
      agg_sum += fp.agg[i];
    }
    if (!grew) rules_[winner].support += 1.0;
    for (std::size_t i = 0; i < rules_.size(); ++i) rules_[i].firing_sum += fp.agg[i];

    const bool anchored = s.provenance == Provenance::pseudo && pseudo_anchoring;
    const bool pseudo = s.provenance == Provenance::pseudo;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const double lambda = agg_sum > 0.0 ? fp.agg[i] / agg_sum : 1.0 / static_cast<double>(rules_.size());
      if (anchored)
        fwgrls_pseudo_update(rules_[i], xe, s.y, lambda, cfg_.alpha, t);
      else
        fwgrls_update(rules_[i], xe, s.y, lambda, cfg_.alpha);
      if (!pseudo) rules_[i].anchor_w = rules_[i].w;
    }

    if (had_rules) carry = pre.scores;
  }
}

std::vector<double> BaseLearner::rule_accuracies(const std::vector<TrainingSample>& samples) const {
  std::vector<double> acc(rules_.size(), 0.0);
  if (samples.empty()) return acc;
  for (const auto& s : samples) {
    const ExtendedInput xe = ExtendedInput::from_features(s.x);
    std::size_t truth = 0;
    for (std::size_t o = 1; o < s.y.size(); ++o)
      if (s.y[o] > s.y[truth]) truth = o;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t o = 1; o < n_classes_; ++o)
        if (column_dot(xe.v, rules_[i].w, o) > column_dot(xe.v, rules_[i].w, best)) best = o;
      if (best == truth) acc[i] += 1.0;
    }
  }
  for (double& a : acc) a /= static_cast<double>(samples.size());
  return acc;
}

bool BaseLearner::finite() const {
  for (const Rule& r : rules_) {
    if (!r.w.all_finite() || !r.omega.all_finite() || !r.anchor_w.all_finite()) return false;
    if (!std::isfinite(r.support) || !std::isfinite(r.firing_sum)) return false;
  }
  for (double v : forgetting_.mu)
    if (!std::isfinite(v)) return false;
  return std::isfinite(ns_.mean_bias) && std::isfinite(ns_.std_bias) &&
         std::isfinite(ns_.mean_var) && std::isfinite(ns_.std_var);
}

}  // namespace wsn
