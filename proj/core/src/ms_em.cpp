#include "msrvine/ms_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msrvine/rng.hpp"

namespace msrvine {

namespace {
constexpr double kTransClamp = 1e-6;

TransitionMatrix clamp_columns(int p, std::vector<double> P) {
  for (int j = 0; j < p; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < p; ++i) {
      double& v = P[i * p + j];
      v = std::clamp(v, kTransClamp, 1.0 - kTransClamp);
      colsum += v;
    }
    for (int i = 0; i < p; ++i) P[i * p + j] /= colsum;
  }
  return TransitionMatrix(p, std::move(P));
}
}  // namespace

void check_model(const MSRVineModel& model) {
  if (model.p <= 0 || static_cast<int>(model.regimes.size()) != model.p)
    throw std::invalid_argument("model: regime count mismatch");
  if (model.trans.p != model.p)
    throw std::invalid_argument("model: transition matrix size mismatch");
  const int d = model.d();
  for (const auto& spec : model.regimes) {
    if (spec.d() != d) throw std::invalid_argument("model: regimes must share dimension");
    check_spec(spec);
  }
}

RegimeLogDensities regime_log_densities(const MSRVineModel& model, const CopulaData& data) {
  if (data.d != model.d()) throw std::invalid_argument("regime_log_densities: dimension mismatch");
  RegimeLogDensities ld;
  ld.T = data.T;
  ld.p = model.p;
  ld.ld.assign(static_cast<std::size_t>(data.T) * model.p, 0.0);
  for (int k = 0; k < model.p; ++k) {
    const auto rows = log_density_rows(model.regimes[k], data);
    for (int t = 0; t < data.T; ++t) ld.ld[t * model.p + k] = rows[t];
  }
  return ld;
}

double ms_log_likelihood(const MSRVineModel& model, const CopulaData& data) {
  const auto ld = regime_log_densities(model, data);
  return hamilton_filter(ld, model.trans).loglik;
}

EMStepResult em_step(const MSRVineModel& model, const CopulaData& data) {
  const int p = model.p, T = data.T;
  const auto ld = regime_log_densities(model, data);
  const auto fr = hamilton_filter(ld, model.trans);
  const auto sm = kim_smoother(fr, model.trans);

  // M-step for the chain: ratio of summed pairwise to summed marginal
  // smoothed probabilities, columnwise
  std::vector<double> P(p * p, 0.0);
  for (int j = 0; j < p; ++j) {
    double denom = 0.0;
    for (int t = 0; t + 1 < T; ++t) denom += sm.smoothed_at(t, j);
    for (int i = 0; i < p; ++i) {
      double num = 0.0;
      for (int t = 0; t + 1 < T; ++t) num += sm.pairwise_at(t, i, j);
      P[i * p + j] = denom > 0.0 ? num / denom : (i == j ? 1.0 : 0.0);
    }
  }

  EMStepResult res;
  res.loglik = fr.loglik;
  res.smoother = sm;
  res.model.p = p;
  res.model.trans = clamp_columns(p, std::move(P));
  res.model.regimes.resize(p);
  res.se.resize(p);

  // M-step for the copulas: weighted sequential fits with smoothed weights
  std::vector<double> w(T);
  for (int k = 0; k < p; ++k) {
    for (int t = 0; t < T; ++t) w[t] = sm.smoothed_at(t, k);
    const auto& spec = model.regimes[k];
    auto fit = fit_sequential(spec.matrix, spec.families, data, w, spec.trunc_level);
    res.model.regimes[k] = std::move(fit.spec);
    res.se[k] = std::move(fit.se);
  }
  return res;
}

EMFitResult em_fit(const MSRVineModel& model0, const CopulaData& data, double tol,
                   int max_iter) {
  check_model(model0);
  if (max_iter < 1) throw std::invalid_argument("em_fit: max_iter must be >= 1");

  EMFitResult res;
  MSRVineModel cur = model0;
  std::vector<std::vector<std::vector<double>>> cur_se;  // se of the step that built cur
  double best_ll = -std::numeric_limits<double>::infinity();
  double prev_ll = std::numeric_limits<double>::quiet_NaN();

  bool stopped = false;
  for (int l = 0; l < max_iter; ++l) {
    auto step = em_step(cur, data);  // step.loglik scores `cur`
    if (!std::isnan(prev_ll) &&
        std::fabs(step.loglik - prev_ll) < tol * std::fabs(step.loglik)) {
      res.trace.converged = true;
      if (step.loglik > best_ll) {
        best_ll = step.loglik;
        res.model = cur;
        res.se = cur_se;
      }
      stopped = true;
      break;
    }
    res.trace.logliks.push_back(step.loglik);
    res.trace.iterations = l + 1;
    if (step.loglik > best_ll) {
      best_ll = step.loglik;
      res.model = cur;
      res.se = cur_se;
    }
    prev_ll = step.loglik;
    cur = std::move(step.model);
    cur_se = std::move(step.se);
  }

  // without a convergence stop, the last iterate has not been scored yet
  if (!stopped) {
    const double ll = ms_log_likelihood(cur, data);
    if (ll > best_ll) {
      best_ll = ll;
      res.model = std::move(cur);
      res.se = std::move(cur_se);
    }
  }
  // the best iterate can be the starting model, which has no fit-based
  // standard errors; recover them from one weighted fit at its smooths
  if (res.se.empty() || res.se[0].empty()) {
    auto step = em_step(res.model, data);
    res.se = std::move(step.se);
  }

  const auto ld = regime_log_densities(res.model, data);
  const auto fr = hamilton_filter(ld, res.model.trans);
  res.trace.smoothed = kim_smoother(fr, res.model.trans).smoothed;
  return res;
}

MSRVineModel initialize(const std::vector<RegimeRecipe>& recipes, const CopulaData& data) {
  const int p = static_cast<int>(recipes.size());
  if (p < 1) throw std::invalid_argument("initialize: need at least one regime recipe");
  const int d = recipes.front().matrix.d;
  if (data.T < 2 * p * d) throw std::invalid_argument("initialize: too few observations");

  MSRVineModel model;
  model.p = p;
  model.regimes.resize(p);

  std::vector<double> unit(data.T, 1.0);
  const int keep = (data.T + 1) / 2;
  for (int k = 0; k < p; ++k) {
    const auto& rec = recipes[k];
    auto full = fit_sequential(rec.matrix, rec.families, data, unit, rec.trunc_level);
    const auto rows = log_density_rows(full.spec, data);
    // refit on the half of the rows this regime explains best
    std::vector<int> order(data.T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rows[a] > rows[b]; });
    std::vector<double> w(data.T, 0.0);
    for (int i = 0; i < keep; ++i) w[order[i]] = 1.0;
    auto refit = fit_sequential(rec.matrix, rec.families, data, w, rec.trunc_level);
    model.regimes[k] = std::move(refit.spec);
  }

  std::vector<double> P(p * p, p > 1 ? 0.1 / (p - 1) : 0.0);
  for (int k = 0; k < p; ++k) P[k * p + k] = p > 1 ? 0.9 : 1.0;
  model.trans = TransitionMatrix(p, std::move(P));
  return model;
}

MSSimulation simulate_ms(const MSRVineModel& model, int T, std::uint64_t seed) {
  check_model(model);
  const int p = model.p, d = model.d();
  const auto pi = stationary_distribution(model.trans);

  Rng chain_rng = Rng::stream(seed, 0x434841494eULL);  // "CHAIN"
  std::vector<int> states(T);
  for (int t = 0; t < T; ++t) {
    std::vector<double> probs(p);
    for (int k = 0; k < p; ++k)
      probs[k] = (t == 0) ? pi[k] : model.trans.at(k, states[t - 1] - 1);
    states[t] = 1 + chain_rng.categorical(probs);
  }

  // one pre-sampled sequence per regime keeps the draw deterministic
  std::vector<CopulaData> pools;
  pools.reserve(p);
  for (int k = 0; k < p; ++k)
    pools.push_back(sample(model.regimes[k], T, splitmix64(seed ^ (0xabcd0000ULL + k))));

  std::vector<double> u(static_cast<std::size_t>(T) * d);
  for (int t = 0; t < T; ++t) {
    const auto row = pools[states[t] - 1].row(t);
    std::copy(row.begin(), row.end(), u.begin() + static_cast<std::size_t>(t) * d);
  }
  return {CopulaData{T, d, std::move(u)}, std::move(states)};
}

}  // namespace msrvine
