#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wescatter/fuzzy_core.hpp"

using namespace wsn;

namespace {

Rule rule_1d(std::initializer_list<double> col) {
  Rule r;
  r.w = Matrix(col.size(), 1);
  std::size_t j = 0;
  for (double v : col) r.w(j++, 0) = v;
  return r;
}

}  // namespace

TEST_CASE("hyperplane distance matches the worked example") {
  const ExtendedInput x{{1.0, 0.5}};
  const Rule r = rule_1d({0.2, 0.4});
  const TargetSignal sig{{1.0}};
  CHECK(hyperplane_distance(x, r, sig, 0) == doctest::Approx(0.5477225575051662).epsilon(1e-14));
}

TEST_CASE("distance is zero on the hyperplane and grows with the residual") {
  const ExtendedInput x{{1.0, 0.5}};
  const Rule r = rule_1d({0.2, 0.4});
  CHECK(hyperplane_distance(x, r, TargetSignal{{0.4}}, 0) == doctest::Approx(0.0));
  const double near = hyperplane_distance(x, r, TargetSignal{{0.5}}, 0);
  const double far = hyperplane_distance(x, r, TargetSignal{{1.5}}, 0);
  CHECK(near < far);
}

TEST_CASE("firing strengths normalise against the worst rule") {
  const std::vector<double> h = firing_strengths({1.0, 2.0}, 0.7);
  CHECK(h[0] == doctest::Approx(std::exp(-0.35)).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(0.4965853037914095).epsilon(1e-14));  // exp(-0.7)
  for (double v : h) {
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("all-zero distances mean every rule fires fully") {
  const std::vector<double> h = firing_strengths({0.0, 0.0, 0.0}, 0.7);
  for (double v : h) CHECK(v == 1.0);
}

TEST_CASE("closest rule always fires at exp(-gamma) or better") {
  for (double d2 : {0.5, 1.0, 7.0}) {
    const std::vector<double> h = firing_strengths({0.3, d2}, 0.7);
    CHECK(*std::max_element(h.begin(), h.end()) >= std::exp(-0.7));
  }
}

TEST_CASE("local output is the firing-weighted average of rule planes") {
  const ExtendedInput x{{1.0, 0.5}};
  std::vector<Rule> rules{rule_1d({1.0, 0.0}), rule_1d({0.0, 2.0})};
  const std::vector<double> out = local_output(x, rules, {1.0, 1.0});
  CHECK(out[0] == doctest::Approx(1.0));  // both planes output 1 here

  // Skewed firings pull toward the stronger rule.
  std::vector<Rule> planes{rule_1d({0.0, 0.0}), rule_1d({2.0, 0.0})};
  const std::vector<double> skew = local_output(x, planes, {3.0, 1.0});
  CHECK(skew[0] == doctest::Approx(0.5));  // (3*0 + 1*2) / 4
}

TEST_CASE("confidence follows the top-two ratio with a degenerate guard") {
  CHECK(confidence({0.6, 0.3, 0.1}) == doctest::Approx(0.6666666666666667).epsilon(1e-14));
  CHECK(confidence({0.3, 0.6, 0.1}) == doctest::Approx(0.6666666666666667).epsilon(1e-14));
  CHECK(confidence({0.0, 0.0}) == 0.5);
  CHECK(confidence({-0.2, -0.3}) == 0.5);
  CHECK(confidence({0.5, 0.5}) == 0.5);
}

TEST_CASE("inference keeps one firing profile per class") {
  // Rule a nails class 0 and is silent on class 1; rule b is the mirror.  With
  // per-class profiles each class leans on its own expert and both scores land
  // strictly above 0.5; a single shared profile would weight the two rules
  // equally and pin both scores at exactly 0.5.
  const ExtendedInput x{{1.0, 1.0}};
  Rule a;
  a.w = Matrix(2, 2);
  a.w(0, 0) = 1.0;  // class-0 plane outputs 1 exactly, class-1 plane outputs 0
  Rule b;
  b.w = Matrix(2, 2);
  b.w(0, 1) = 1.0;  // class-1 plane outputs 1 exactly, class-0 plane outputs 0

  const InferenceResult res = infer(x, {a, b}, TargetSignal{{1.0, 1.0}}, 0.7);
  REQUIRE(res.scores.size() == 2);
  const double expected = 1.0 / (1.0 + 0.4965853037914095);  // h={1, exp(-0.7)}
  CHECK(res.scores[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(res.scores[1] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(res.scores[0] > 0.5);
  CHECK(res.scores[1] > 0.5);
  CHECK(res.max_firing == doctest::Approx(1.0));  // each class has an exact plane
}

TEST_CASE("empty rule set yields zero scores") {
  const InferenceResult res = infer(ExtendedInput{{1.0}}, {}, TargetSignal{{0.5, 0.5}}, 0.7);
  REQUIRE(res.scores.size() == 2);
  CHECK(res.scores[0] == 0.0);
  CHECK(res.scores[1] == 0.0);
}

TEST_CASE("uniform prior sums to one") {
  const std::vector<double> p = uniform_prior(4);
  REQUIRE(p.size() == 4);
  for (double v : p) CHECK(v == doctest::Approx(0.25));
}
