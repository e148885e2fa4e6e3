#include "wescatter/fuzzy_core.hpp"

#include <algorithm>
#include <cmath>

namespace wsn {

std::vector<double> uniform_prior(std::size_t n_classes) {
  return std::vector<double>(n_classes, 1.0 / static_cast<double>(n_classes));
}

double hyperplane_distance(const ExtendedInput& x, const Rule& rule,
                           const TargetSignal& signal, std::size_t class_index) {
  const double proj = column_dot(x.v, rule.w, class_index);
  double wsq = 0.0;
  for (std::size_t j = 0; j < rule.w.rows(); ++j) {
    const double wj = rule.w(j, class_index);
    wsq += wj * wj;
  }
  return std::fabs(signal.v[class_index] - proj) / std::sqrt(1.0 + wsq);
}

std::vector<double> firing_strengths(const std::vector<double>& distances, double gamma) {
  std::vector<double> h(distances.size(), 1.0);
  double dmax = 0.0;
  for (double d : distances) dmax = std::max(dmax, d);
  if (dmax <= 0.0) return h;  // every rule lies on the target: full firing
  for (std::size_t i = 0; i < distances.size(); ++i)
    h[i] = std::exp(-gamma * distances[i] / dmax);
  return h;
}

std::vector<double> local_output(const ExtendedInput& x, const std::vector<Rule>& rules,
                                 const std::vector<double>& h) {
  const std::size_t n_classes = rules.empty() ? 0 : rules.front().w.cols();
  std::vector<double> out(n_classes, 0.0);
  for (std::size_t o = 0; o < n_classes; ++o) out[o] = weighted_class_output(x, rules, h, o);
  return out;
}

double weighted_class_output(const ExtendedInput& x, const std::vector<Rule>& rules,
                             const std::vector<double>& h, std::size_t class_index) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    num += h[i] * column_dot(x.v, rules[i].w, class_index);
    den += h[i];
  }
  if (den <= 0.0) return 0.0;
  return num / den;
}

double confidence(const std::vector<double>& y_hat) {
  if (y_hat.size() < 2) return 1.0;
  double top = y_hat[0], second = y_hat[1];
  if (second > top) std::swap(top, second);
  for (std::size_t o = 2; o < y_hat.size(); ++o) {
    const double v = y_hat[o];
    if (v > top) {
      second = top;
      top = v;
    } else if (v > second) {
      second = v;
    }
  }
  const double mass = top + second;
  if (mass <= 0.0) return 0.5;
  return top / mass;
}

InferenceResult infer(const ExtendedInput& x, const std::vector<Rule>& rules,
                      const TargetSignal& signal, double gamma) {
  InferenceResult res;
  const std::size_t n_classes = rules.empty() ? signal.v.size() : rules.front().w.cols();
  res.scores.assign(n_classes, 0.0);
  if (rules.empty()) return res;

  std::vector<double> d(rules.size());
  for (std::size_t o = 0; o < n_classes; ++o) {
    for (std::size_t i = 0; i < rules.size(); ++i)
      d[i] = hyperplane_distance(x, rules[i], signal, o);
    const std::vector<double> h = firing_strengths(d, gamma);
    for (double hi : h) res.max_firing = std::max(res.max_firing, hi);
    res.scores[o] = weighted_class_output(x, rules, h, o);
  }
  return res;
}

}  // namespace wsn
