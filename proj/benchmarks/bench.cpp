#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "msrvine/ms_em.hpp"
#include "msrvine/rng.hpp"
#include "msrvine/rvine.hpp"
#include "msrvine/structure_select.hpp"

using namespace msrvine;

namespace {

RVineSpec gauss_dvine4(double rho1, double rho2, double rho3) {
  RVineMatrix m(4, {4, 0, 0, 0, 1, 3, 0, 0, 2, 1, 2, 0, 3, 2, 1, 1});
  std::vector<CopulaFamily> fams(16, CopulaFamily::Independence);
  for (int c = 0; c < 4; ++c)
    for (int r = c + 1; r < 4; ++r) fams[r * 4 + c] = CopulaFamily::Gaussian;
  RVineSpec spec = make_spec(m, fams, 3);
  for (int c = 0; c < 4; ++c)
    for (int r = c + 1; r < 4; ++r) {
      const int tree = 4 - r;
      spec.params[r * 4 + c] = {tree == 1 ? rho1 : (tree == 2 ? rho2 : rho3)};
    }
  return spec;
}

void bm_pair_density(benchmark::State& state) {
  const PairCopula pc{CopulaFamily::Gumbel, {2.5}};
  double u = 0.31, v = 0.62, acc = 0.0;
  for (auto _ : state) {
    acc += density(pc, u, v);
    u = 0.1 + 0.8 * (acc - std::floor(acc));
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(bm_pair_density);

void bm_hinv(benchmark::State& state) {
  const PairCopula pc{CopulaFamily::Gumbel, {2.5}};
  double p = 0.4, acc = 0.0;
  for (auto _ : state) {
    acc += hinv(pc, p, 0.7);
    p = 0.05 + 0.9 * (acc - std::floor(acc));
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(bm_hinv);

void bm_vine_density(benchmark::State& state) {
  const auto spec = gauss_dvine4(0.7, 0.4, 0.2);
  const auto data = sample(spec, 1000, 1);
  for (auto _ : state) {
    double acc = 0.0;
    for (double v : log_density_rows(spec, data)) acc += v;
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(bm_vine_density);

void bm_vine_sample(benchmark::State& state) {
  const auto spec = gauss_dvine4(0.7, 0.4, 0.2);
  for (auto _ : state) {
    const auto d = sample(spec, 500, 2);
    benchmark::DoNotOptimize(d.u.data());
  }
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(bm_vine_sample);

void bm_sequential_fit(benchmark::State& state) {
  const auto spec = gauss_dvine4(0.7, 0.4, 0.2);
  const auto data = sample(spec, 500, 3);
  const std::vector<double> w(500, 1.0);
  for (auto _ : state) {
    const auto fit = fit_sequential(spec.matrix, spec.families, data, w, 3);
    benchmark::DoNotOptimize(fit.spec.params.data());
  }
}
BENCHMARK(bm_sequential_fit);

void bm_filter_smoother(benchmark::State& state) {
  const int T = 2000, p = 2;
  RegimeLogDensities ld;
  ld.T = T;
  ld.p = p;
  ld.ld.resize(T * p);
  Rng rng(7);
  for (auto& v : ld.ld) v = rng.normal();
  const TransitionMatrix P(2, {0.95, 0.1, 0.05, 0.9});
  for (auto _ : state) {
    const auto sm = kim_smoother(hamilton_filter(ld, P), P);
    benchmark::DoNotOptimize(sm.smoothed.data());
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(bm_filter_smoother);

void bm_kendall_tau(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(9);
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_kendall_tau(x, y));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_kendall_tau)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
