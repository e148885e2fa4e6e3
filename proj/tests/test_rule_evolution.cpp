#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wescatter/rule_evolution.hpp"

using namespace wsn;

namespace {

Rule scalar_rule(double w, double omega, double anchor, double firing_sum = 0.0,
                 std::uint64_t birth = 0) {
  Rule r;
  r.w = Matrix(1, 1);
  r.w(0, 0) = w;
  r.omega = Matrix(1, 1);
  r.omega(0, 0) = omega;
  r.anchor_w = Matrix(1, 1);
  r.anchor_w(0, 0) = anchor;
  r.firing_sum = firing_sum;
  r.birth_index = birth;
  return r;
}

}  // namespace

// ==== forgetting mean ====

TEST_CASE("forgetting mean accumulates mass then moves by f/F") {
  ForgettingState st;
  st.mu = {0.0};
  st.F = 1.0;
  st.f = 0.9;
  update_forgetting_mean(st, ExtendedInput{{1.0}});
  CHECK(st.F == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(st.mu[0] == doctest::Approx(0.4736842105263158).epsilon(1e-14));
}

TEST_CASE("first update after init snaps the mean onto the sample") {
  ForgettingState st;
  forgetting_init(st, 3);
  st.f = 0.93;
  update_forgetting_mean(st, ExtendedInput{{1.0, 0.2, 0.7}});
  CHECK(st.mu[0] == doctest::Approx(1.0));
  CHECK(st.mu[1] == doctest::Approx(0.2));
  CHECK(st.mu[2] == doctest::Approx(0.7));
}

// ==== drift rate ====

TEST_CASE("identical halves show no drift") {
  const DriftRate d = drift_rate({{0.15}, {0.25}, {0.15}, {0.25}});
  CHECK(d.rate == doctest::Approx(0.0));
  CHECK(d.forgetting_factor == doctest::Approx(1.0));
}

TEST_CASE("disjoint single-bin halves show maximal drift") {
  const DriftRate d = drift_rate({{0.05}, {0.05}, {0.95}, {0.95}});
  CHECK(d.rate == doctest::Approx(1.0));
  CHECK(d.forgetting_factor == doctest::Approx(0.9));
}

TEST_CASE("half-overlapping bin supports give rate one half") {
  // First half occupies bins {1,2}, second half bins {2,3}.
  const DriftRate d = drift_rate({{0.15}, {0.25}, {0.25}, {0.35}});
  CHECK(d.rate == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.forgetting_factor == doctest::Approx(0.95).epsilon(1e-14));
}

TEST_CASE("single-sample partition reports zero drift") {
  const DriftRate d = drift_rate({{0.4, 0.6}});
  CHECK(d.rate == 0.0);
  CHECK(d.forgetting_factor == 1.0);
}

TEST_CASE("drift rate averages over features") {
  // Feature 0 fully shifts, feature 1 is constant: mean TV = 0.5.
  const DriftRate d = drift_rate({{0.05, 0.5}, {0.05, 0.5}, {0.95, 0.5}, {0.95, 0.5}});
  CHECK(d.rate == doctest::Approx(0.5));
}

// ==== significance gates ====

TEST_CASE("confidence factor spans (1,2] and is 2 at zero") {
  CHECK(ns_k(0.0) == 2.0);
  CHECK(ns_k(1.0) == doctest::Approx(1.3678794411714423).epsilon(1e-14));
  CHECK(ns_k(0.5) > ns_k(1.0));
  CHECK(ns_k(3.0) > 1.0);
  CHECK(ns_k(3.0) <= 1.001);
}

TEST_CASE("a constant statistic stream never fires a gate") {
  NsState ns;
  for (int i = 0; i < 200; ++i) CHECK(ns_step(ns, 1.0, 0.25) == NsAction::none);
}

TEST_CASE("a bias explosion fires the grow gate and resets the min trackers") {
  // Settled regime: constant statistics keep both gates quiet, then a bias
  // jump must trip growth within a couple of samples.
  NsState ns;
  for (int i = 0; i < 100; ++i) ns_step(ns, 0.1, 0.1);
  for (int i = 0; i < 20; ++i) CHECK(ns_step(ns, 0.1, 0.1) == NsAction::none);

  NsAction got = NsAction::none;
  for (int i = 0; i < 20 && got == NsAction::none; ++i) got = ns_step(ns, 25.0, 0.1);
  CHECK(got == NsAction::grow);
  CHECK(ns.min_mean_bias == ns.mean_bias);
  CHECK(ns.min_std_bias == ns.std_bias);
  CHECK(ns.min_mean_var == ns.mean_var);
  CHECK(ns.min_std_var == ns.std_var);
}

TEST_CASE("a variance explosion fires the prune gate") {
  NsState ns;
  for (int i = 0; i < 100; ++i) ns_step(ns, 0.1, 0.1);

  NsAction got = NsAction::none;
  for (int i = 0; i < 40 && got == NsAction::none; ++i) got = ns_step(ns, 0.1, 25.0);
  CHECK(got == NsAction::prune);
}

TEST_CASE("growth takes precedence when both channels explode at once") {
  NsState ns;
  for (int i = 0; i < 100; ++i) ns_step(ns, 0.1, 0.1);
  NsAction got = NsAction::none;
  for (int i = 0; i < 20 && got == NsAction::none; ++i) got = ns_step(ns, 30.0, 30.0);
  CHECK(got == NsAction::grow);
}

// ==== expected output ====

TEST_CASE("expected output reports per-rule contributions and their sum") {
  std::vector<Rule> rules;
  Rule a;
  a.w = Matrix(2, 1);
  a.w(0, 0) = 1.0;
  a.w(1, 0) = 0.0;
  Rule b;
  b.w = Matrix(2, 1);
  b.w(0, 0) = 0.0;
  b.w(1, 0) = 2.0;
  rules.push_back(a);
  rules.push_back(b);

  const ExpectedOutput eo = expected_output(rules, {1.0, 0.5});
  CHECK(eo.per_rule(0, 0) == doctest::Approx(1.0));
  CHECK(eo.per_rule(1, 0) == doctest::Approx(1.0));
  CHECK(eo.total[0] == doctest::Approx(2.0));
}

// ==== structural edits ====

TEST_CASE("grown rules start as flat planes with a scaled identity correction") {
  LearnerConfig cfg;
  cfg.k3 = 0.2;
  cfg.omega_init = 1e5;
  const Rule r = grow_rule(2, 2, cfg, 17);
  REQUIRE(r.w.rows() == 3);
  REQUIRE(r.w.cols() == 2);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t o = 0; o < 2; ++o) CHECK(r.w(j, o) == 0.2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.omega(i, j) == (i == j ? 1e5 : 0.0));
  CHECK(r.support == 1.0);
  CHECK(r.anchor_w == r.w);
  CHECK(r.birth_index == 17);
  CHECK(r.firing_sum == 0.0);
}

TEST_CASE("pruning removes the weakest contributor and moves its support to the winner") {
  std::vector<Rule> rules{scalar_rule(2.0, 1.0, 2.0), scalar_rule(0.1, 1.0, 0.1)};
  rules[0].support = 5.0;
  rules[1].support = 3.0;
  const std::size_t gone = prune_weakest(rules, {1.0}, 0, 1);
  CHECK(gone == 1);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].support == 8.0);
  CHECK(rules[0].w(0, 0) == 2.0);
}

TEST_CASE("pruning the winner hands its support to the strongest survivor") {
  std::vector<Rule> rules{scalar_rule(0.1, 1.0, 0.1), scalar_rule(2.0, 1.0, 2.0),
                          scalar_rule(1.0, 1.0, 1.0)};
  rules[0].support = 4.0;
  rules[1].support = 1.0;
  rules[2].support = 1.0;
  const std::size_t gone = prune_weakest(rules, {1.0}, 0, 1);
  CHECK(gone == 0);
  REQUIRE(rules.size() == 2);
  CHECK(rules[0].w(0, 0) == 2.0);   // strongest survivor
  CHECK(rules[0].support == 5.0);   // inherited mass
  CHECK(rules[1].support == 1.0);
}

TEST_CASE("pruning refuses to fall below the rule floor") {
  std::vector<Rule> rules{scalar_rule(1.0, 1.0, 1.0)};
  CHECK(prune_weakest(rules, {1.0}, 0, 1) == rules.size());
  CHECK(rules.size() == 1);
}

TEST_CASE("equal contributions prune the lowest index") {
  std::vector<Rule> rules{scalar_rule(1.0, 1.0, 1.0), scalar_rule(1.0, 1.0, 1.0)};
  CHECK(prune_weakest(rules, {1.0}, 1, 1) == 0);
}

// ==== recursive updates ====

TEST_CASE("one scalar step reproduces the closed-form gain") {
  Rule r = scalar_rule(0.0, 1e5, 0.0);
  fwgrls_update(r, ExtendedInput{{1.0}}, {1.0}, 1.0, 0.0);
  CHECK(r.w(0, 0) == doctest::Approx(0.999990000099999).epsilon(1e-14));
}

TEST_CASE("recursive solution matches batch normal equations on noiseless problems") {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t u = 1 + static_cast<std::size_t>(eng() % 5);
    const std::size_t dim = u + 1;
    const std::size_t n = dim + 2 + static_cast<std::size_t>(eng() % (20 - dim - 1));

    std::vector<double> w_true(dim);
    for (auto& v : w_true) v = unif(eng);

    std::vector<std::vector<double>> xs(n, std::vector<double>(dim, 1.0));
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < dim; ++j) xs[i][j] = unif(eng);
      double y = 0.0;
      for (std::size_t j = 0; j < dim; ++j) y += xs[i][j] * w_true[j];
      ys[i] = y;
    }

    // Recursive pass: unit membership, no decay, broad prior.
    Rule r;
    r.w = Matrix(dim, 1);
    r.omega = Matrix::identity_scaled(dim, 1e5);
    r.anchor_w = r.w;
    for (std::size_t i = 0; i < n; ++i)
      fwgrls_update(r, ExtendedInput{xs[i]}, {ys[i]}, 1.0, 0.0);

    // Independent batch solution: X'X w = X'y by Gaussian elimination with
    // partial pivoting.
    std::vector<std::vector<double>> a(dim, std::vector<double>(dim + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < dim; ++p) {
        for (std::size_t q = 0; q < dim; ++q) a[p][q] += xs[i][p] * xs[i][q];
        a[p][dim] += xs[i][p] * ys[i];
      }
    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t piv = col;
      for (std::size_t row = col + 1; row < dim; ++row)
        if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
      std::swap(a[col], a[piv]);
      for (std::size_t row = 0; row < dim; ++row) {
        if (row == col) continue;
        const double m = a[row][col] / a[col][col];
        for (std::size_t q = col; q <= dim; ++q) a[row][q] -= m * a[col][q];
      }
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double w_ne = a[j][dim] / a[j][j];
      CHECK(std::fabs(r.w(j, 0) - w_ne) <= 1e-3);
    }
  }
}

TEST_CASE("weight decay shrinks the solution") {
  Rule plain = scalar_rule(0.0, 1e5, 0.0);
  Rule decayed = scalar_rule(0.0, 1e5, 0.0);
  for (int i = 0; i < 50; ++i) {
    fwgrls_update(plain, ExtendedInput{{1.0}}, {1.0}, 1.0, 0.0);
    fwgrls_update(decayed, ExtendedInput{{1.0}}, {1.0}, 1.0, 0.05);
  }
  CHECK(decayed.w(0, 0) < plain.w(0, 0));
  CHECK(decayed.w(0, 0) > 0.0);
}

TEST_CASE("anchored update pulls toward the anchor in proportion to firing history") {
  // Zero prediction error isolates the pull term.
  Rule r = scalar_rule(2.0, 1.0, 1.0, 4.0, 0);
  fwgrls_pseudo_update(r, ExtendedInput{{1.0}}, {2.0 * 1.0}, 1.0, 0.01, 2);
  CHECK(r.w(0, 0) < 2.0);
  CHECK(r.w(0, 0) > 1.0);
}

TEST_CASE("a rule that never fired takes no anchor pull") {
  Rule r = scalar_rule(2.0, 1.0, 1.0, 0.0, 0);
  fwgrls_pseudo_update(r, ExtendedInput{{1.0}}, {2.0}, 1.0, 0.01, 5);
  CHECK(r.w(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("a rule born this step divides its firing ratio by one") {
  Rule r = scalar_rule(2.0, 1.0, 1.0, 1.0, 9);
  fwgrls_pseudo_update(r, ExtendedInput{{1.0}}, {2.0}, 1.0, 0.01, 9);
  CHECK(std::isfinite(r.w(0, 0)));
  CHECK(r.w(0, 0) < 2.0);
}
