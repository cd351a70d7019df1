#include <doctest.h>

#include <cmath>
#include <vector>

#include "msrvine/pair_copula.hpp"
#include "msrvine/rng.hpp"
#include "oracles.hpp"

using namespace msrvine;

namespace {

WeightedPairSample sample_pair(const PairCopula& pc, int n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1);
  WeightedPairSample s;
  for (int i = 0; i < n; ++i) {
    const double v = rng.uniform();
    const double p = rng.uniform();
    s.u2.push_back(v);
    s.u1.push_back(hinv(pc, p, v));
    s.w.push_back(1.0);
  }
  return s;
}

double sample_tau(const WeightedPairSample& s) {
  // O(n^2) concordance count, fine at test sizes
  const int n = static_cast<int>(s.u1.size());
  long long c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sgn = (s.u1[i] - s.u1[j]) * (s.u2[i] - s.u2[j]);
      c += sgn > 0 ? 1 : -1;
    }
  return 2.0 * c / (static_cast<double>(n) * (n - 1));
}

const std::vector<PairCopula> kProbes = {
    {CopulaFamily::Gaussian, {0.6}},       {CopulaFamily::Gaussian, {-0.4}},
    {CopulaFamily::StudentT, {0.5, 4.0}},  {CopulaFamily::StudentT, {-0.3, 8.0}},
    {CopulaFamily::Gumbel, {2.0}},         {CopulaFamily::Gumbel, {4.5}},
    {CopulaFamily::Gumbel90, {2.0}},       {CopulaFamily::Gumbel180, {3.0}},
    {CopulaFamily::Gumbel270, {1.7}},
};

}  // namespace

TEST_CASE("density examples") {
  CHECK(density({CopulaFamily::Independence, {}}, 0.37, 0.81) == doctest::Approx(1.0));
  CHECK(density({CopulaFamily::Gaussian, {0.0}}, 0.3, 0.8) == doctest::Approx(1.0));
  // median point of the Gaussian copula: 1/sqrt(1-rho^2)
  CHECK(density({CopulaFamily::Gaussian, {0.6}}, 0.5, 0.5) == doctest::Approx(1.25));
  for (double u : {0.2, 0.5, 0.85})
    for (double v : {0.1, 0.6, 0.9})
      CHECK(density({CopulaFamily::Gumbel180, {2.5}}, u, v) ==
            doctest::Approx(density({CopulaFamily::Gumbel, {2.5}}, 1 - u, 1 - v)));
}

TEST_CASE("density domain and parameter guards") {
  CHECK_THROWS_AS(density({CopulaFamily::Gaussian, {0.5}}, -0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS(density({CopulaFamily::Gaussian, {0.5}}, 0.5, 1.2), std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::Gaussian, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::Gumbel, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::StudentT, {0.5, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::StudentT, {0.5}), std::invalid_argument);
}

TEST_CASE("rotation identities pointwise") {
  const PairCopula base{CopulaFamily::Gumbel, {3.0}};
  for (double u : {0.15, 0.5, 0.92})
    for (double v : {0.08, 0.44, 0.7}) {
      CHECK(density({CopulaFamily::Gumbel90, {3.0}}, u, v) ==
            doctest::Approx(density(base, 1 - u, v)).epsilon(1e-12));
      CHECK(density({CopulaFamily::Gumbel180, {3.0}}, u, v) ==
            doctest::Approx(density(base, 1 - u, 1 - v)).epsilon(1e-12));
      CHECK(density({CopulaFamily::Gumbel270, {3.0}}, u, v) ==
            doctest::Approx(density(base, u, 1 - v)).epsilon(1e-12));
    }
}

TEST_CASE("hfunc examples") {
  CHECK(hfunc({CopulaFamily::Gaussian, {0.0}}, 0.3, 0.5) == doctest::Approx(0.3));
  for (double rho : {-0.7, 0.2, 0.9})
    CHECK(hfunc({CopulaFamily::Gaussian, {rho}}, 0.5, 0.5) == doctest::Approx(0.5));
  // central finite difference of the closed-form Gumbel cdf
  const double delta = 1e-6;
  const double fd = (oracle::gumbel_cop_cdf(0.3, 0.7 + delta, 2.0) -
                     oracle::gumbel_cop_cdf(0.3, 0.7 - delta, 2.0)) /
                    (2 * delta);
  CHECK(hfunc({CopulaFamily::Gumbel, {2.0}}, 0.3, 0.7) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("hfunc matches cdf finite differences for every family") {
  const double delta = 1e-5;
  for (const auto& pc : kProbes)
    for (double u : {0.1, 0.35, 0.65, 0.9})
      for (double v : {0.15, 0.5, 0.85}) {
        const double fd =
            (oracle::pair_cdf(pc, u, v + delta) - oracle::pair_cdf(pc, u, v - delta)) /
            (2 * delta);
        CHECK(hfunc(pc, u, v) == doctest::Approx(fd).epsilon(5e-6));
      }
}

TEST_CASE("hfunc2 matches cdf finite differences in the first argument") {
  const double delta = 1e-5;
  for (const auto& pc : kProbes)
    for (double u : {0.2, 0.6, 0.9})
      for (double v : {0.25, 0.55, 0.8}) {
        const double fd =
            (oracle::pair_cdf(pc, u + delta, v) - oracle::pair_cdf(pc, u - delta, v)) /
            (2 * delta);
        CHECK(hfunc2(pc, v, u) == doctest::Approx(fd).epsilon(5e-6));
      }
}

TEST_CASE("hinv examples and round trips") {
  CHECK(hinv({CopulaFamily::Independence, {}}, 0.42, 0.9) == doctest::Approx(0.42));
  {
    const PairCopula pc{CopulaFamily::Gaussian, {0.7}};
    CHECK(hinv(pc, hfunc(pc, 0.2, 0.6), 0.6) == doctest::Approx(0.2).epsilon(1e-8));
  }
  {
    // bisection oracle for the Gumbel inverse
    const PairCopula pc{CopulaFamily::Gumbel, {3.0}};
    double lo = 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (hfunc(pc, mid, 0.5) < 0.5 ? lo : hi) = mid;
    }
    CHECK(hinv(pc, 0.5, 0.5) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  }
  for (const auto& pc : kProbes)
    for (double p : {0.05, 0.3, 0.7, 0.95})
      for (double v : {0.1, 0.5, 0.9})
        CHECK(hfunc(pc, hinv(pc, p, v), v) == doctest::Approx(p).epsilon(1e-8));
}

TEST_CASE("tau maps") {
  CHECK(tau_to_param(CopulaFamily::Gaussian, 0.0)[0] == doctest::Approx(0.0));
  CHECK(tau_to_param(CopulaFamily::Gaussian, 0.5)[0] ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-5));
  CHECK(tau_to_param(CopulaFamily::Gumbel, 0.5)[0] == doctest::Approx(2.0));
  CHECK(param_to_tau({CopulaFamily::Gaussian, {0.0}}) == doctest::Approx(0.0));
  CHECK(param_to_tau({CopulaFamily::Gumbel, {2.0}}) == doctest::Approx(0.5));
  CHECK(param_to_tau({CopulaFamily::Gumbel270, {2.0}}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(tau_to_param(CopulaFamily::Gumbel, -0.3), std::domain_error);
  CHECK_THROWS_AS(tau_to_param(CopulaFamily::Gumbel90, 0.3), std::domain_error);
  // round trip across the tau domain
  for (auto f : {CopulaFamily::Gaussian, CopulaFamily::Gumbel, CopulaFamily::Gumbel180})
    for (double t : {0.05, 0.3, 0.55, 0.85})
      CHECK(param_to_tau({f, tau_to_param(f, t)}) == doctest::Approx(t).epsilon(1e-10));
  for (auto f : {CopulaFamily::Gumbel90, CopulaFamily::Gumbel270})
    for (double t : {-0.75, -0.4, -0.1})
      CHECK(param_to_tau({f, tau_to_param(f, t)}) == doctest::Approx(t).epsilon(1e-10));
}

TEST_CASE("tau maps agree with sample concordance") {
  {
    const auto s = sample_pair({CopulaFamily::Gaussian, {std::sqrt(2.0) / 2.0}}, 4000, 7);
    CHECK(sample_tau(s) == doctest::Approx(0.5).epsilon(0.08));
  }
  {
    const auto s = sample_pair({CopulaFamily::Gumbel, {2.0}}, 4000, 8);
    CHECK(sample_tau(s) == doctest::Approx(0.5).epsilon(0.08));
  }
  {
    const auto s = sample_pair({CopulaFamily::Gumbel270, {2.0}}, 4000, 9);
    CHECK(sample_tau(s) == doctest::Approx(-0.5).epsilon(0.08));
  }
}

TEST_CASE("density integrates to one") {
  // graded composite quadrature toward the corners
  std::vector<double> brk = {0.0, 1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.5,
                             0.7,  0.9, 0.99, 1 - 1e-4, 1 - 1e-6, 1.0};
  auto integrate_1d = [&](auto&& f) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i)
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, brk[i], brk[i + 1], 6, 1e-9);
    return total;
  };
  for (const auto& pc : kProbes) {
    auto inner = [&](double v) {
      auto g = [&](double u) { return density(pc, u, v); };
      return integrate_1d(g);
    };
    CHECK(integrate_1d(inner) == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("fit_weighted examples") {
  {
    const auto s = sample_pair({CopulaFamily::Gaussian, {0.6}}, 2000, 11);
    const auto fit = fit_weighted(CopulaFamily::Gaussian, s);
    CHECK(fit.converged);
    CHECK(fit.params[0] == doctest::Approx(0.6).epsilon(0.1));
    CHECK(std::fabs(fit.params[0] - 0.6) < 0.05);
    CHECK(fit.se[0] > 0.0);
  }
  {
    // weights that select a subsample reproduce the subsample fit
    auto s = sample_pair({CopulaFamily::Gaussian, {0.8}}, 600, 12);
    auto weak = sample_pair({CopulaFamily::Gaussian, {0.1}}, 600, 13);
    WeightedPairSample mixed = s;
    for (int i = 0; i < 600; ++i) {
      mixed.u1.push_back(weak.u1[i]);
      mixed.u2.push_back(weak.u2[i]);
      mixed.w.push_back(0.0);
    }
    const auto wf = fit_weighted(CopulaFamily::Gaussian, mixed);
    const auto sub = fit_weighted(CopulaFamily::Gaussian, s);
    CHECK(wf.params[0] == doctest::Approx(sub.params[0]).epsilon(1e-9));
    CHECK(std::fabs(wf.params[0] - 0.8) < 0.1);
  }
  {
    WeightedPairSample s{{0.2, 0.5}, {0.3, 0.6}, {1.0, 1.0}};
    const auto fit = fit_weighted(CopulaFamily::Independence, s);
    CHECK(fit.params.empty());
    CHECK(fit.loglik == doctest::Approx(0.0));
  }
}

TEST_CASE("fit_weighted grid-search oracle on five points") {
  WeightedPairSample s{{0.12, 0.4, 0.55, 0.7, 0.93},
                       {0.2, 0.33, 0.6, 0.81, 0.9},
                       {1.0, 1.0, 1.0, 1.0, 1.0}};
  const auto fit = fit_weighted(CopulaFamily::Gaussian, s);
  double best_rho = 0.0, best_ll = -1e300;
  for (double rho = -0.998; rho <= 0.998; rho += 1e-4) {
    const double ll = weighted_loglik(CopulaFamily::Gaussian, std::vector<double>{rho}, s);
    if (ll > best_ll) {
      best_ll = ll;
      best_rho = rho;
    }
  }
  CHECK(fit.params[0] == doctest::Approx(best_rho).epsilon(1e-3));
  CHECK(fit.loglik >= best_ll - 1e-6);
}

TEST_CASE("degenerate weights fall back to tau inversion") {
  auto s = sample_pair({CopulaFamily::Gaussian, {0.5}}, 500, 21);
  for (auto& w : s.w) w = 0.0;
  for (int i = 0; i < 4; ++i) s.w[i] = 1.0;
  const auto fit = fit_weighted(CopulaFamily::Gaussian, s);
  CHECK(fit.fallback);
  CHECK(std::fabs(fit.params[0]) < 1.0);
}

TEST_CASE("select_family") {
  {
    const auto s = sample_pair({CopulaFamily::Gumbel, {2.0}}, 1000, 31);
    const auto pc =
        select_family(s, {CopulaFamily::Gaussian, CopulaFamily::Gumbel});
    CHECK(pc.family == CopulaFamily::Gumbel);
  }
  {
    const auto s = sample_pair({CopulaFamily::Independence, {}}, 400, 32);
    const auto pc = select_family(
        s, {CopulaFamily::Independence, CopulaFamily::Gaussian, CopulaFamily::Gumbel});
    CHECK(pc.family == CopulaFamily::Independence);
  }
  {
    const auto s = sample_pair({CopulaFamily::Gaussian, {0.4}}, 200, 33);
    const auto pc = select_family(s, {CopulaFamily::Gaussian});
    CHECK(pc.family == CopulaFamily::Gaussian);
  }
}

TEST_CASE("family tags round trip") {
  for (auto f : {CopulaFamily::Independence, CopulaFamily::Gaussian, CopulaFamily::StudentT,
                 CopulaFamily::Gumbel, CopulaFamily::Gumbel90, CopulaFamily::Gumbel180,
                 CopulaFamily::Gumbel270})
    CHECK(family_from_tag(family_tag(f)) == f);
  CHECK(family_tag(CopulaFamily::Gumbel180) == "SG");
  CHECK(!family_from_tag("frank").has_value());
}
