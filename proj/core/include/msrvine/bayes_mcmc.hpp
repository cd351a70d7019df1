#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "msrvine/ms_em.hpp"
#include "msrvine/regime_chain.hpp"
#include "msrvine/rng.hpp"
#include "msrvine/rvine.hpp"

namespace msrvine {

struct ParamBounds {
  double lo = 0.0, hi = 0.0;
};

// flat-prior supports: rho in [-0.999,0.999], Gumbel theta in [1,17],
// Student-t nu in [2.05,30]
ParamBounds default_bounds(CopulaFamily f, int param_index);

struct PriorSpec {
  int p = 0;
  std::vector<double> dirichlet_alpha;  // p x p, columnwise Dirichlet

  static PriorSpec noninformative(int p);  // all alphas 1
};

struct PosteriorDraw {
  std::vector<std::vector<std::vector<double>>> regime_params;  // per regime, d*d cells
  TransitionMatrix trans;
  std::vector<int> states;  // 1-based
};

struct ChainConfig {
  int iterations = 20000;
  int burnin = 1000;
  int thin = 5;
  std::uint64_t seed = 0;
  double proposal_weight = 0.5;    // weight of the random-walk component
  std::vector<int> ident_trees;    // identification statistic trees; empty = all
  int checkpoint_every = 1000;
  std::function<void(int)> on_checkpoint;  // optional progress hook
};

// exact block draw of the state path given parameters (forward filter,
// backward sampling); labels 1-based
std::vector<int> sample_states(const RegimeLogDensities& ld, const TransitionMatrix& P,
                               Rng& rng);

// conjugate columnwise Dirichlet update given transition counts (p x p,
// row-major, entry (i,j) = count of j -> i)
TransitionMatrix update_transition(const std::vector<int>& counts, const PriorSpec& prior,
                                   Rng& rng);

// one MH sweep over all edge parameters of one regime, edge-by-edge from
// tree 1 upward; likelihood restricted to the regime's rows.  Returns the
// number of accepted proposals; total proposal count via n_proposals.
int mh_update_regime(RVineSpec& spec, const CopulaData& regime_rows,
                     const std::vector<std::vector<double>>& ml_mode,
                     const std::vector<std::vector<double>>& ml_se,
                     double proposal_weight, Rng& rng, int* n_proposals = nullptr);

struct GibbsResult {
  std::vector<PosteriorDraw> draws;  // after burn-in, thinning and relabeling
  double acceptance_rate = 0.0;
};

GibbsResult gibbs_run(const MSRVineModel& model0, const CopulaData& data,
                      const ChainConfig& cfg, const PriorSpec& prior,
                      const std::vector<std::vector<std::vector<double>>>& ml_se);

// n / (1 + 2 sum rho_k), autocorrelations summed until the first nonpositive
// estimate; a constant chain reports n and sets *degenerate
double effective_sample_size(const std::vector<double>& chain, bool* degenerate = nullptr);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct CredibleIntervals {
  Interval symmetric;  // empirical alpha/2 and 1-alpha/2 quantiles
  Interval hpd;        // shortest window containing ceil(level*n) sorted samples
};

CredibleIntervals credible_intervals(std::vector<double> samples, double level);

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;
  double mean_deviance = 0.0;
  bool projected = false;  // posterior-mean parameters needed domain projection
};

// deviance D = -2 * filter loglik with states integrated out; the model
// argument supplies structures/families shared by all draws
DicResult dic(const std::vector<PosteriorDraw>& draws, const MSRVineModel& shape,
              const CopulaData& data);

// sum of |tau| over the edges of the given trees (empty set = all trees up to
// the truncation level); the regime ordering statistic
double identification_statistic(const RVineSpec& spec, const std::vector<int>& trees);

}  // namespace msrvine
