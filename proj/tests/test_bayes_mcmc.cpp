#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <map>
#include <vector>

#include "msrvine/bayes_mcmc.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace msrvine;

namespace {

RVineSpec gauss2(double rho) {
  RVineMatrix m(2, {2, 0, 1, 1});
  RVineSpec spec = make_spec(m, {CopulaFamily::Independence, CopulaFamily::Independence,
                                 CopulaFamily::Gaussian, CopulaFamily::Independence},
                             1);
  spec.params[2] = {rho};
  return spec;
}

MSRVineModel gauss2_model(double rho1, double rho2) {
  MSRVineModel m;
  m.p = 2;
  m.regimes = {gauss2(rho1), gauss2(rho2)};
  m.trans = TransitionMatrix(2, {0.9, 0.1, 0.1, 0.9});
  return m;
}

}  // namespace

TEST_CASE("default bounds") {
  CHECK(default_bounds(CopulaFamily::Gaussian, 0).lo == doctest::Approx(-0.999));
  CHECK(default_bounds(CopulaFamily::Gumbel, 0).lo == doctest::Approx(1.0));
  CHECK(default_bounds(CopulaFamily::Gumbel, 0).hi == doctest::Approx(17.0));
  CHECK(default_bounds(CopulaFamily::StudentT, 1).lo == doctest::Approx(2.05));
  CHECK(default_bounds(CopulaFamily::StudentT, 1).hi == doctest::Approx(30.0));
}

TEST_CASE("sample_states matches enumeration frequencies") {
  // short series, many draws: empirical path marginals against the exact
  // smoothed probabilities
  const auto model = scenarios::scenario_model(2);
  const auto sim = simulate_ms(model, 6, 3);
  const auto ld = regime_log_densities(model, sim.data);
  const auto ex = oracle_smoother(ld, model.trans);

  Rng rng = Rng::stream(12, 1);
  const int n = 40000;
  std::vector<double> freq(6, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto path = sample_states(ld, model.trans, rng);
    for (int t = 0; t < 6; ++t) freq[t] += path[t] == 1 ? 1.0 : 0.0;
  }
  for (int t = 0; t < 6; ++t)
    CHECK(freq[t] / n == doctest::Approx(ex.smoothed_at(t, 0)).epsilon(0.03));
}

TEST_CASE("transition update is conjugate Dirichlet") {
  const PriorSpec prior = PriorSpec::noninformative(2);
  // counts (i,j) = j -> i: column 0 sees 30 stays and 10 exits
  const std::vector<int> counts = {30, 5, 10, 15};
  Rng rng = Rng::stream(4, 2);
  const int n = 100000;
  double mean00 = 0.0, mean11 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto P = update_transition(counts, prior, rng);
    mean00 += P.at(0, 0);
    mean11 += P.at(1, 1);
    CHECK(P.at(0, 0) + P.at(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  // posterior means (alpha + count) / column totals: (1+30)/(2+40), (1+15)/(2+20)
  CHECK(mean00 / n == doctest::Approx(31.0 / 42.0).epsilon(0.01));
  CHECK(mean11 / n == doctest::Approx(16.0 / 22.0).epsilon(0.01));
}

TEST_CASE("transition update with empty columns reduces to the prior") {
  const PriorSpec prior = PriorSpec::noninformative(2);
  const std::vector<int> counts = {0, 0, 0, 0};
  Rng rng = Rng::stream(5, 2);
  const int n = 50000;
  double mean = 0.0, meansq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = update_transition(counts, prior, rng).at(0, 0);
    mean += v;
    meansq += v * v;
  }
  mean /= n;
  meansq /= n;
  // Beta(1,1): mean 1/2, variance 1/12
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(meansq - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("mh_update_regime moves toward the data and respects bounds") {
  const auto truth = gauss2(0.6);
  const auto d = sample(truth, 600, 41);
  RVineSpec spec = gauss2(0.0);
  std::vector<std::vector<double>> mode(4), se(4);
  mode[2] = {0.55};
  se[2] = {0.05};
  Rng rng = Rng::stream(42, 3);
  int accepted = 0, proposed = 0;
  for (int it = 0; it < 300; ++it) {
    int np = 0;
    accepted += mh_update_regime(spec, d, mode, se, 0.5, rng, &np);
    proposed += np;
  }
  CHECK(proposed == 300);
  CHECK(accepted > 0);
  CHECK(spec.params[2][0] == doctest::Approx(0.6).epsilon(0.15));
  CHECK(std::fabs(spec.params[2][0]) < 0.999 + 1e-12);
}

TEST_CASE("posterior mean of a d=2 Gaussian copula is near the MLE") {
  const auto truth = gauss2(0.6);
  const auto d = sample(truth, 500, 51);
  MSRVineModel m0;
  m0.p = 1;
  m0.regimes = {gauss2(0.5)};
  m0.trans = TransitionMatrix(1, {1.0});

  std::vector<std::vector<std::vector<double>>> se(1, std::vector<std::vector<double>>(4));
  se[0][2] = {0.04};
  ChainConfig cfg;
  cfg.iterations = 3000;
  cfg.burnin = 500;
  cfg.thin = 2;
  cfg.seed = 77;
  const auto res = gibbs_run(m0, d, cfg, PriorSpec::noninformative(1), se);
  CHECK(static_cast<int>(res.draws.size()) == (3000 - 500) / 2);
  double mean = 0.0;
  for (const auto& dr : res.draws) mean += dr.regime_params[0][2][0];
  mean /= res.draws.size();
  CHECK(mean == doctest::Approx(0.6).epsilon(0.07));
  CHECK(std::fabs(mean - 0.6) < 0.04);
  CHECK(res.acceptance_rate > 0.01);
  CHECK(res.acceptance_rate <= 1.0);
}

TEST_CASE("gibbs_run is deterministic in the seed") {
  const auto model = gauss2_model(0.7, 0.1);
  const auto sim = simulate_ms(model, 150, 61);
  std::vector<std::vector<std::vector<double>>> se(
      2, std::vector<std::vector<double>>(4));
  se[0][2] = {0.05};
  se[1][2] = {0.08};
  ChainConfig cfg;
  cfg.iterations = 200;
  cfg.burnin = 50;
  cfg.thin = 3;
  cfg.seed = 99;
  const auto a = gibbs_run(model, sim.data, cfg, PriorSpec::noninformative(2), se);
  const auto b = gibbs_run(model, sim.data, cfg, PriorSpec::noninformative(2), se);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    CHECK(a.draws[i].regime_params == b.draws[i].regime_params);
    CHECK(a.draws[i].trans.P == b.draws[i].trans.P);
    CHECK(a.draws[i].states == b.draws[i].states);
  }
  CHECK(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("draws respect the identification ordering") {
  const auto model = gauss2_model(0.2, 0.7);
  const auto sim = simulate_ms(model, 200, 62);
  std::vector<std::vector<std::vector<double>>> se(
      2, std::vector<std::vector<double>>(4));
  se[0][2] = {0.06};
  se[1][2] = {0.06};
  ChainConfig cfg;
  cfg.iterations = 400;
  cfg.burnin = 100;
  cfg.thin = 2;
  cfg.seed = 101;
  const auto res = gibbs_run(model, sim.data, cfg, PriorSpec::noninformative(2), se);
  for (const auto& dr : res.draws) {
    std::vector<double> stat;
    for (int k = 0; k < 2; ++k) {
      RVineSpec s = model.regimes[k];
      s.params = dr.regime_params[k];
      stat.push_back(identification_statistic(s, {}));
    }
    CHECK(stat[0] <= stat[1] + 1e-12);
  }
}

TEST_CASE("identification statistic sums absolute tau over chosen trees") {
  const auto spec = scenarios::gumbel_cvine({0.8, 0.6, 0.4});
  CHECK(identification_statistic(spec, {1}) == doctest::Approx(3 * 0.8).epsilon(1e-12));
  CHECK(identification_statistic(spec, {1, 2}) ==
        doctest::Approx(3 * 0.8 + 2 * 0.6).epsilon(1e-12));
  CHECK(identification_statistic(spec, {}) ==
        doctest::Approx(3 * 0.8 + 2 * 0.6 + 0.4).epsilon(1e-12));
}

TEST_CASE("effective sample size") {
  {
    // iid normal chain: ESS close to n
    Rng rng = Rng::stream(8, 1);
    std::vector<double> x(4000);
    for (auto& v : x) v = rng.normal();
    CHECK(effective_sample_size(x) > 2500.0);
  }
  {
    // AR(1) with phi=0.9: ESS ratio near (1-phi)/(1+phi) = 1/19
    Rng rng = Rng::stream(8, 2);
    const int n = 20000;
    std::vector<double> x(n);
    x[0] = rng.normal();
    for (int i = 1; i < n; ++i) x[i] = 0.9 * x[i - 1] + rng.normal();
    const double ratio = effective_sample_size(x) / n;
    CHECK(ratio == doctest::Approx(1.0 / 19.0).epsilon(0.5));
    CHECK(ratio < 0.12);
  }
  {
    std::vector<double> x(100, 3.14);
    bool degenerate = false;
    CHECK(effective_sample_size(x, &degenerate) == doctest::Approx(100.0));
    CHECK(degenerate);
  }
}

TEST_CASE("credible intervals") {
  {
    std::vector<double> x(100);
    for (int i = 0; i < 100; ++i) x[i] = i + 1;
    const auto ci = credible_intervals(x, 0.90);
    CHECK(ci.symmetric.lo == doctest::Approx(5.95));
    CHECK(ci.symmetric.hi == doctest::Approx(95.05));
    // HPD of a uniform sample: a 90-point window
    CHECK(ci.hpd.hi - ci.hpd.lo == doctest::Approx(89.0));
  }
  {
    // normal draws: HPD approximately equals the symmetric interval
    Rng rng = Rng::stream(9, 1);
    std::vector<double> x(20000);
    for (auto& v : x) v = rng.normal();
    const auto ci = credible_intervals(x, 0.90);
    CHECK(ci.symmetric.lo == doctest::Approx(-1.645).epsilon(0.05));
    CHECK(ci.symmetric.hi == doctest::Approx(1.645).epsilon(0.05));
    CHECK(ci.hpd.lo == doctest::Approx(ci.symmetric.lo).epsilon(0.1));
    CHECK(ci.hpd.hi == doctest::Approx(ci.symmetric.hi).epsilon(0.1));
  }
  {
    std::vector<double> x(50, 2.5);
    const auto ci = credible_intervals(x, 0.95);
    CHECK(ci.symmetric.lo == doctest::Approx(2.5));
    CHECK(ci.hpd.lo == doctest::Approx(2.5));
    CHECK(ci.hpd.hi == doctest::Approx(2.5));
  }
  CHECK_THROWS_AS(credible_intervals({}, 0.9), std::invalid_argument);
}

TEST_CASE("dic on a hand-built draw set") {
  const auto truth = gauss2(0.5);
  const auto d = sample(truth, 200, 71);
  MSRVineModel shape;
  shape.p = 1;
  shape.regimes = {gauss2(0.5)};
  shape.trans = TransitionMatrix(1, {1.0});

  auto draw_at = [&](double rho) {
    PosteriorDraw dr;
    dr.regime_params.resize(1);
    dr.regime_params[0].resize(4);
    dr.regime_params[0][2] = {rho};
    dr.trans = TransitionMatrix(1, {1.0});
    dr.states.assign(200, 1);
    return dr;
  };
  auto dev = [&](double rho) {
    MSRVineModel m = shape;
    m.regimes[0].params[2] = {rho};
    return -2.0 * ms_log_likelihood(m, d);
  };

  const std::vector<PosteriorDraw> draws = {draw_at(0.45), draw_at(0.55)};
  const auto res = dic(draws, shape, d);
  const double mean_dev = 0.5 * (dev(0.45) + dev(0.55));
  const double pd = mean_dev - dev(0.5);
  CHECK(res.mean_deviance == doctest::Approx(mean_dev).epsilon(1e-10));
  CHECK(res.p_d == doctest::Approx(pd).epsilon(1e-10));
  CHECK(res.dic == doctest::Approx(mean_dev + pd).epsilon(1e-10));
  CHECK(!res.projected);
}
