#pragma once

#include <cstdint>
#include <vector>

#include "msrvine/regime_chain.hpp"
#include "msrvine/rvine.hpp"

namespace msrvine {

// The complete Markov-switching model: one R-vine copula per regime plus the
// transition matrix of the hidden chain.
struct MSRVineModel {
  int p = 0;
  std::vector<RVineSpec> regimes;
  TransitionMatrix trans;

  int d() const { return regimes.empty() ? 0 : regimes.front().d(); }
};

void check_model(const MSRVineModel& model);

struct EMTrace {
  std::vector<double> logliks;     // filter log likelihood per iteration
  std::vector<double> smoothed;    // T x p smoothed probabilities of the returned model
  int iterations = 0;
  bool converged = false;
};

struct EMFitResult {
  MSRVineModel model;
  EMTrace trace;
  // per regime: d*d per-edge standard errors from the weighted bivariate fits
  std::vector<std::vector<std::vector<double>>> se;
};

// per-row per-regime log densities log f(u_t | S_t = k)
RegimeLogDensities regime_log_densities(const MSRVineModel& model, const CopulaData& data);

// filter log likelihood with states integrated out (stationary initial law)
double ms_log_likelihood(const MSRVineModel& model, const CopulaData& data);

struct EMStepResult {
  MSRVineModel model;   // updated parameters
  double loglik;        // filter loglik of the *input* model
  SmootherResult smoother;
  std::vector<std::vector<std::vector<double>>> se;
};

EMStepResult em_step(const MSRVineModel& model, const CopulaData& data);

// iterates em_step until the relative loglik change drops below tol; returns
// the best-loglik iterate (stepwise M-steps are approximate and may decrease
// the likelihood slightly)
EMFitResult em_fit(const MSRVineModel& model0, const CopulaData& data,
                   double tol = 1e-6, int max_iter = 100);

struct RegimeRecipe {
  RVineMatrix matrix;
  std::vector<CopulaFamily> families;  // d*d
  int trunc_level = 0;
};

// starting values: per-regime unit-weight fit on all data, then refit each
// regime on the half of the rows where its per-row log density ranks highest;
// transition matrix initialized with diagonal 0.9
MSRVineModel initialize(const std::vector<RegimeRecipe>& recipes, const CopulaData& data);

struct MSSimulation {
  CopulaData data;
  std::vector<int> states;  // 1-based latent path
};

// simulates the hidden chain from its stationary law, then regime-conditional
// vine samples; deterministic given seed
MSSimulation simulate_ms(const MSRVineModel& model, int T, std::uint64_t seed);

}  // namespace msrvine
