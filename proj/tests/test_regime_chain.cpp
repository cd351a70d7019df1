#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "msrvine/regime_chain.hpp"
#include "msrvine/rng.hpp"

using namespace msrvine;

namespace {

// random log-density panel for property tests
RegimeLogDensities random_ld(int T, int p, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 42);
  RegimeLogDensities ld;
  ld.T = T;
  ld.p = p;
  ld.ld.resize(static_cast<std::size_t>(T) * p);
  for (auto& v : ld.ld) v = 2.0 * rng.normal();
  return ld;
}

TransitionMatrix random_trans(int p, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 43);
  std::vector<double> P(p * p);
  for (int j = 0; j < p; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < p; ++i) colsum += (P[i * p + j] = 0.05 + rng.uniform());
    for (int i = 0; i < p; ++i) P[i * p + j] /= colsum;
  }
  return TransitionMatrix(p, std::move(P));
}

}  // namespace

TEST_CASE("transition matrix validation") {
  CHECK_THROWS_AS(TransitionMatrix(2, {0.5, 0.5, 0.6, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(TransitionMatrix(2, {1.1, 0.5, -0.1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(TransitionMatrix(2, {0.5, 0.5, 0.5}), std::invalid_argument);
  const TransitionMatrix P(2, {0.95, 0.1, 0.05, 0.9});
  CHECK(P.at(0, 0) == doctest::Approx(0.95));
  CHECK(P.at(1, 0) == doctest::Approx(0.05));
}

TEST_CASE("stationary distribution") {
  {
    // two states with stay probabilities a=0.95, b=0.9
    const TransitionMatrix P(2, {0.95, 0.1, 0.05, 0.9});
    const auto pi = stationary_distribution(P);
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto P = random_trans(3, s);
    const auto pi = stationary_distribution(P);
    double sum = 0.0;
    for (double v : pi) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // P pi = pi
    for (int i = 0; i < 3; ++i) {
      double out = 0.0;
      for (int j = 0; j < 3; ++j) out += P.at(i, j) * pi[j];
      CHECK(out == doctest::Approx(pi[i]).epsilon(1e-10));
    }
  }
  // reducible chain rejected
  CHECK_THROWS_AS(stationary_distribution(TransitionMatrix(2, {1.0, 0.0, 0.0, 1.0})),
                  std::runtime_error);
}

TEST_CASE("filter on a hand-worked two-step example") {
  // p=2, T=2, start from the stationary law of a=0.95, b=0.9
  const TransitionMatrix P(2, {0.95, 0.1, 0.05, 0.9});
  RegimeLogDensities ld;
  ld.T = 2;
  ld.p = 2;
  ld.ld = {std::log(2.0), std::log(0.5), std::log(1.0), std::log(3.0)};

  const double pi1 = 2.0 / 3.0, pi2 = 1.0 / 3.0;
  const double l1 = pi1 * 2.0 + pi2 * 0.5;
  const double f11 = pi1 * 2.0 / l1, f12 = pi2 * 0.5 / l1;
  const double pr21 = 0.95 * f11 + 0.1 * f12;
  const double pr22 = 0.05 * f11 + 0.9 * f12;
  const double l2 = pr21 * 1.0 + pr22 * 3.0;

  const auto fr = hamilton_filter(ld, P);
  CHECK(fr.predicted[0] == doctest::Approx(pi1).epsilon(1e-12));
  CHECK(fr.filtered[0] == doctest::Approx(f11).epsilon(1e-12));
  CHECK(fr.filtered[1] == doctest::Approx(f12).epsilon(1e-12));
  CHECK(fr.predicted[2] == doctest::Approx(pr21).epsilon(1e-12));
  CHECK(fr.loglik == doctest::Approx(std::log(l1) + std::log(l2)).epsilon(1e-12));
}

TEST_CASE("filter rows sum to one and loglik is shift covariant") {
  const auto ld = random_ld(60, 3, 1);
  const auto P = random_trans(3, 1);
  const auto fr = hamilton_filter(ld, P);
  for (int t = 0; t < 60; ++t) {
    double sf = 0.0, sp = 0.0;
    for (int k = 0; k < 3; ++k) {
      sf += fr.filtered[t * 3 + k];
      sp += fr.predicted[t * 3 + k];
    }
    CHECK(sf == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sp == doctest::Approx(1.0).epsilon(1e-12));
  }
  // adding a constant to every log density at time t adds it to the loglik
  auto shifted = ld;
  for (int k = 0; k < 3; ++k) shifted.ld[10 * 3 + k] += 1.7;
  const auto fr2 = hamilton_filter(shifted, P);
  CHECK(fr2.loglik == doctest::Approx(fr.loglik + 1.7).epsilon(1e-10));
  for (std::size_t i = 0; i < fr.filtered.size(); ++i)
    CHECK(fr2.filtered[i] == doctest::Approx(fr.filtered[i]).epsilon(1e-12));
}

TEST_CASE("smoother matches exact path enumeration") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int T = 8, p = 2;
    const auto ld = random_ld(T, p, 100 + s);
    const auto P = random_trans(p, 100 + s);
    const auto fr = hamilton_filter(ld, P);
    const auto km = kim_smoother(fr, P);
    const auto ex = oracle_smoother(ld, P);
    for (std::size_t i = 0; i < km.smoothed.size(); ++i)
      CHECK(km.smoothed[i] == doctest::Approx(ex.smoothed[i]).epsilon(1e-10));
    for (std::size_t i = 0; i < km.pairwise.size(); ++i)
      CHECK(km.pairwise[i] == doctest::Approx(ex.pairwise[i]).epsilon(1e-10));
  }
  {
    // three regimes too
    const auto ld = random_ld(6, 3, 55);
    const auto P = random_trans(3, 55);
    const auto km = kim_smoother(hamilton_filter(ld, P), P);
    const auto ex = oracle_smoother(ld, P);
    for (std::size_t i = 0; i < km.smoothed.size(); ++i)
      CHECK(km.smoothed[i] == doctest::Approx(ex.smoothed[i]).epsilon(1e-10));
  }
}

TEST_CASE("smoother marginals are pairwise sums") {
  const auto ld = random_ld(40, 2, 9);
  const auto P = random_trans(2, 9);
  const auto sm = kim_smoother(hamilton_filter(ld, P), P);
  for (int t = 0; t + 1 < 40; ++t) {
    for (int j = 0; j < 2; ++j) {
      double over_i = 0.0;
      for (int i = 0; i < 2; ++i) over_i += sm.pairwise_at(t, i, j);
      CHECK(over_i == doctest::Approx(sm.smoothed_at(t, j)).epsilon(1e-10));
    }
    for (int i = 0; i < 2; ++i) {
      double over_j = 0.0;
      for (int j = 0; j < 2; ++j) over_j += sm.pairwise_at(t, i, j);
      CHECK(over_j == doctest::Approx(sm.smoothed_at(t + 1, i)).epsilon(1e-10));
    }
  }
}

TEST_CASE("single-regime degenerates are exact") {
  const auto ld = random_ld(25, 1, 3);
  const TransitionMatrix P(1, {1.0});
  const auto fr = hamilton_filter(ld, P);
  double manual = 0.0;
  for (double v : ld.ld) manual += v;
  CHECK(fr.loglik == doctest::Approx(manual).epsilon(1e-12));
  const auto sm = kim_smoother(fr, P);
  for (double v : sm.smoothed) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("transition counts") {
  const std::vector<int> path = {1, 1, 2, 2, 2, 1, 2};
  const auto c = transition_counts(path, 2);
  // (i,j) = count of j -> i moves, row-major
  CHECK(c[0] == 1);  // 1 -> 1
  CHECK(c[1] == 1);  // 2 -> 1
  CHECK(c[2] == 2);  // 1 -> 2
  CHECK(c[3] == 2);  // 2 -> 2
  CHECK_THROWS_AS(transition_counts({1, 3}, 2), std::invalid_argument);
}
