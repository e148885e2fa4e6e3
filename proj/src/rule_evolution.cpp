#include "wescatter/rule_evolution.hpp"

#include <algorithm>
#include <cmath>

namespace wsn {

double ns_k(double s) { return std::exp(-(s * s)) + 1.0; }

namespace {

void welford(double sample, double& mean, double& m2, double& stddev, std::uint64_t n) {
  const double delta = sample - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (sample - mean);
  stddev = std::sqrt(m2 / static_cast<double>(n));
}

}  // namespace

NsAction ns_step(NsState& ns, double bias_sample, double var_sample) {
  ++ns.sample_count;
  const std::uint64_t n = ns.sample_count;
  welford(bias_sample, ns.mean_bias, ns.m2_bias, ns.std_bias, n);
  welford(var_sample, ns.mean_var, ns.m2_var, ns.std_var, n);

  if (n == 1) {
    ns.min_mean_bias = ns.mean_bias;
    ns.min_std_bias = ns.std_bias;
    ns.min_mean_var = ns.mean_var;
    ns.min_std_var = ns.std_var;
    return NsAction::none;
  }
  ns.min_mean_bias = std::min(ns.min_mean_bias, ns.mean_bias);
  ns.min_std_bias = std::min(ns.min_std_bias, ns.std_bias);
  ns.min_mean_var = std::min(ns.min_mean_var, ns.mean_var);
  ns.min_std_var = std::min(ns.min_std_var, ns.std_var);

  const double k1 = ns_k(bias_sample);
  const double k2 = ns_k(var_sample);

  // Strict inequalities: a constant statistic after a reset holds the gate
  // shut instead of re-firing on exact equality.
  const bool grow = ns.mean_bias + ns.std_bias > ns.min_mean_bias + k1 * ns.min_std_bias;
  const bool prune = ns.mean_var + ns.std_var > ns.min_mean_var + 2.0 * k2 * ns.min_std_var;

  NsAction action = NsAction::none;
  if (grow)
    action = NsAction::grow;
  else if (prune)
    action = NsAction::prune;

  if (action != NsAction::none) {
    ns.min_mean_bias = ns.mean_bias;
    ns.min_std_bias = ns.std_bias;
    ns.min_mean_var = ns.mean_var;
    ns.min_std_var = ns.std_var;
  }
  return action;
}

void forgetting_init(ForgettingState& st, std::size_t extended_dim) {
  st.mu.assign(extended_dim, 0.0);
  st.F = 0.0;
  st.f = 1.0;
  st.rate = 0.0;
}

void update_forgetting_mean(ForgettingState& st, const ExtendedInput& x) {
  st.F += st.f;
  const double g = st.f / st.F;
  for (std::size_t j = 0; j < st.mu.size(); ++j) st.mu[j] += g * (x.v[j] - st.mu[j]);
}

DriftRate drift_rate(const std::vector<std::vector<double>>& features) {
  DriftRate out;
  const std::size_t n = features.size();
  if (n < 2) return out;  // single-sample partition: no evidence of drift
  const std::size_t u = features.front().size();
  const std::size_t split = n / 2;

  constexpr std::size_t kBins = 10;
  double tv_sum = 0.0;
  std::vector<double> pa(kBins), pb(kBins);
  for (std::size_t j = 0; j < u; ++j) {
    std::fill(pa.begin(), pa.end(), 0.0);
    std::fill(pb.begin(), pb.end(), 0.0);
    for (std::size_t i = 0; i < split; ++i) {
      const double v = std::clamp(features[i][j], 0.0, 1.0);
      pa[std::min<std::size_t>(static_cast<std::size_t>(v * kBins), kBins - 1)] += 1.0;
    }
    for (std::size_t i = split; i < n; ++i) {
      const double v = std::clamp(features[i][j], 0.0, 1.0);
      pb[std::min<std::size_t>(static_cast<std::size_t>(v * kBins), kBins - 1)] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t b = 0; b < kBins; ++b)
      tv += std::fabs(pa[b] / static_cast<double>(split) - pb[b] / static_cast<double>(n - split));
    tv_sum += 0.5 * tv;
  }
  out.rate = u == 0 ? 0.0 : tv_sum / static_cast<double>(u);
  out.forgetting_factor = 1.0 - 0.1 * out.rate;
  return out;
}

ExpectedOutput expected_output(const std::vector<Rule>& rules, const std::vector<double>& mu_e) {
  ExpectedOutput eo;
  const std::size_t n_classes = rules.empty() ? 0 : rules.front().w.cols();
  eo.per_rule = Matrix(rules.size(), n_classes);
  eo.total.assign(n_classes, 0.0);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t o = 0; o < n_classes; ++o) {
      const double c = column_dot(mu_e, rules[i].w, o);
      eo.per_rule(i, o) = c;
      eo.total[o] += c;
    }
  }
  return eo;
}

Rule grow_rule(std::size_t n_features, std::size_t n_classes, const LearnerConfig& cfg,
               std::uint64_t birth_index) {
  Rule r;
  r.w = Matrix(n_features + 1, n_classes, cfg.k3);
  r.support = 1.0;
  r.omega = Matrix::identity_scaled(n_features + 1, cfg.omega_init);
  r.anchor_w = r.w;
  r.birth_index = birth_index;
  r.firing_sum = 0.0;
  return r;
}

std::size_t prune_weakest(std::vector<Rule>& rules, const std::vector<double>& mu_e,
                          std::size_t winner_index, std::size_t min_rules) {
  if (rules.size() <= std::max<std::size_t>(min_rules, 1)) return rules.size();

  std::vector<double> contribution(rules.size(), 0.0);
  for (std::size_t i = 0; i < rules.size(); ++i)
    for (std::size_t o = 0; o < rules[i].w.cols(); ++o)
      contribution[i] += column_dot(mu_e, rules[i].w, o);

  std::size_t weakest = 0;
  for (std::size_t i = 1; i < rules.size(); ++i)
    if (contribution[i] < contribution[weakest]) weakest = i;

  std::size_t heir = winner_index;
  if (weakest == winner_index) {
    // The winner itself goes: its mass falls to the strongest survivor.
    heir = weakest == 0 ? 1 : 0;
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (i != weakest && contribution[i] > contribution[heir]) heir = i;
  }
  rules[heir].support += rules[weakest].support;
  rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(weakest));
  return weakest;
}

namespace {

// Shared gain/correction step of the recursive estimator.  Returns the gain
// vector K; omega is replaced by its corrected, re-symmetrised successor.
std::vector<double> rls_gain(Rule& rule, const std::vector<double>& x, double lambda) {
  const std::size_t n = x.size();
  std::vector<double> ox(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += rule.omega(i, j) * x[j];
    ox[i] = s;
  }
  const double denom = 1.0 + lambda * dot(x, ox);
  std::vector<double> gain(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) gain[i] = lambda * ox[i] / denom;

  // omega <- omega - K x' omega, then symmetrise to stop round-off from
  // accumulating into an asymmetric correction.
  std::vector<double> xo(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * rule.omega(i, j);
    xo[j] = s;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rule.omega(i, j) -= gain[i] * xo[j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (rule.omega(i, j) + rule.omega(j, i));
      rule.omega(i, j) = s;
      rule.omega(j, i) = s;
    }
  return gain;
}

}  // namespace

void fwgrls_update(Rule& rule, const ExtendedInput& x, const std::vector<double>& y,
                   double lambda, double alpha) {
  const std::size_t n = x.v.size();
  const std::vector<double> gain = rls_gain(rule, x.v, lambda);
  for (std::size_t o = 0; o < rule.w.cols(); ++o) {
    const double err = y[o] - column_dot(x.v, rule.w, o);
    std::vector<double> decay(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += rule.omega(i, j) * rule.w(j, o);
      decay[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i)
      rule.w(i, o) += -alpha * decay[i] + gain[i] * err;
  }
}

void fwgrls_pseudo_update(Rule& rule, const ExtendedInput& x, const std::vector<double>& y,
                          double lambda, double alpha, std::uint64_t t) {
  const std::size_t n = x.v.size();
  const std::vector<double> gain = rls_gain(rule, x.v, lambda);
  const double age = t > rule.birth_index ? static_cast<double>(t - rule.birth_index) : 1.0;
  const double pull = rule.firing_sum / age;
  for (std::size_t o = 0; o < rule.w.cols(); ++o) {
    const double err = y[o] - column_dot(x.v, rule.w, o);
    std::vector<double> decay(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        s += rule.omega(i, j) * (rule.w(j, o) - rule.anchor_w(j, o));
      decay[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i)
      rule.w(i, o) += -alpha * pull * decay[i] + gain[i] * err;
  }
}

}  // namespace wsn
