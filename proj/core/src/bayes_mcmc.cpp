#include "msrvine/bayes_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace msrvine {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
double pnorm(double x) { return boost::math::cdf(kStdNormal, x); }
double qnorm(double p) { return boost::math::quantile(kStdNormal, p); }
double dnorm(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014327; }

// truncated normal on [lo,hi] via inverse-cdf
double rtruncnorm(Rng& rng, double mu, double sigma, double lo, double hi) {
  const double a = pnorm((lo - mu) / sigma), b = pnorm((hi - mu) / sigma);
  double u = a + rng.uniform() * (b - a);
  u = std::clamp(u, 1e-15, 1.0 - 1e-15);
  return std::clamp(mu + sigma * qnorm(u), lo, hi);
}

double dtruncnorm(double x, double mu, double sigma, double lo, double hi) {
  const double z = pnorm((hi - mu) / sigma) - pnorm((lo - mu) / sigma);
  if (z <= 0.0) return 0.0;
  return dnorm((x - mu) / sigma) / (sigma * z);
}

double regime_loglik(const RVineSpec& spec, const CopulaData& rows) {
  if (rows.T == 0) return 0.0;
  const auto ll = log_density_rows(spec, rows);
  return std::accumulate(ll.begin(), ll.end(), 0.0);
}

}  // namespace

ParamBounds default_bounds(CopulaFamily f, int param_index) {
  switch (f) {
    case CopulaFamily::Gaussian:
      return {-0.999, 0.999};
    case CopulaFamily::StudentT:
      return param_index == 0 ? ParamBounds{-0.999, 0.999} : ParamBounds{2.05, 30.0};
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel90:
    case CopulaFamily::Gumbel180:
    case CopulaFamily::Gumbel270:
      return {1.0, 17.0};
    default:
      return {0.0, 0.0};
  }
}

PriorSpec PriorSpec::noninformative(int p) {
  PriorSpec prior;
  prior.p = p;
  prior.dirichlet_alpha.assign(static_cast<std::size_t>(p) * p, 1.0);
  return prior;
}

std::vector<int> sample_states(const RegimeLogDensities& ld, const TransitionMatrix& P,
                               Rng& rng) {
  const auto fr = hamilton_filter(ld, P);
  const int T = fr.T, p = fr.p;
  std::vector<int> states(T);
  if (T == 0) return states;
  {
    std::vector<double> w(fr.filtered.begin() + (T - 1) * p, fr.filtered.begin() + T * p);
    states[T - 1] = 1 + rng.categorical(w);
  }
  for (int t = T - 2; t >= 0; --t) {
    std::vector<double> w(p);
    for (int k = 0; k < p; ++k)
      w[k] = P.at(states[t + 1] - 1, k) * fr.filtered[t * p + k];
    states[t] = 1 + rng.categorical(w);
  }
  return states;
}

TransitionMatrix update_transition(const std::vector<int>& counts, const PriorSpec& prior,
                                   Rng& rng) {
  const int p = prior.p;
  if (static_cast<int>(counts.size()) != p * p)
    throw std::invalid_argument("update_transition: counts size mismatch");
  std::vector<double> P(p * p, 0.0);
  for (int j = 0; j < p; ++j) {
    std::vector<double> alpha(p);
    for (int i = 0; i < p; ++i)
      alpha[i] = prior.dirichlet_alpha[i * p + j] + counts[i * p + j];
    const auto col = rng.dirichlet(alpha);
    for (int i = 0; i < p; ++i) P[i * p + j] = col[i];
  }
  // keep the filter well-defined
  for (int j = 0; j < p; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < p; ++i) {
      P[i * p + j] = std::clamp(P[i * p + j], 1e-10, 1.0);
      colsum += P[i * p + j];
    }
    for (int i = 0; i < p; ++i) P[i * p + j] /= colsum;
  }
  return TransitionMatrix(p, std::move(P));
}

int mh_update_regime(RVineSpec& spec, const CopulaData& regime_rows,
                     const std::vector<std::vector<double>>& ml_mode,
                     const std::vector<std::vector<double>>& ml_se,
                     double proposal_weight, Rng& rng, int* n_proposals) {
  const int d = spec.d();
  double cur_ll = regime_loglik(spec, regime_rows);
  int accepted = 0, proposals = 0;

  // tree 1 upward, within a tree by column order
  for (int tree = 1; tree <= spec.trunc_level; ++tree) {
    const int r = d - tree;
    for (int c = 0; c < r; ++c) {
      const auto fam = spec.family_at(r, c);
      if (fam == CopulaFamily::Independence) continue;
      const int np = param_count(fam);
      for (int k = 0; k < np; ++k) {
        const auto bounds = default_bounds(fam, k);
        const double cur = spec.params[r * d + c][k];
        const double mode =
            std::clamp(ml_mode[r * d + c].empty() ? cur : ml_mode[r * d + c][k],
                       bounds.lo, bounds.hi);
        double se = (static_cast<int>(ml_se[r * d + c].size()) > k)
                        ? ml_se[r * d + c][k]
                        : 0.1;
        se = std::max(se, 0.01);

        // mixture: random walk at the current value + independence at the mode
        const double w_rw = proposal_weight;
        double prop;
        if (rng.uniform() < w_rw)
          prop = rtruncnorm(rng, cur, se, bounds.lo, bounds.hi);
        else
          prop = rtruncnorm(rng, mode, se, bounds.lo, bounds.hi);
        ++proposals;

        const double q_fwd = w_rw * dtruncnorm(prop, cur, se, bounds.lo, bounds.hi) +
                             (1.0 - w_rw) * dtruncnorm(prop, mode, se, bounds.lo, bounds.hi);
        const double q_bwd = w_rw * dtruncnorm(cur, prop, se, bounds.lo, bounds.hi) +
                             (1.0 - w_rw) * dtruncnorm(cur, mode, se, bounds.lo, bounds.hi);

        const double saved = spec.params[r * d + c][k];
        spec.params[r * d + c][k] = prop;
        double new_ll;
        try {
          new_ll = regime_loglik(spec, regime_rows);
        } catch (const std::exception&) {
          spec.params[r * d + c][k] = saved;
          continue;
        }
        const double log_ratio = (new_ll - cur_ll) + std::log(q_bwd) - std::log(q_fwd);
        if (std::log(rng.uniform()) < log_ratio) {
          cur_ll = new_ll;
          ++accepted;
        } else {
          spec.params[r * d + c][k] = saved;
        }
      }
    }
  }
  if (n_proposals) *n_proposals = proposals;
  return accepted;
}

double identification_statistic(const RVineSpec& spec, const std::vector<int>& trees) {
  const int d = spec.d();
  double stat = 0.0;
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) {
      const int tree = spec.tree_of_row(r);
      if (tree > spec.trunc_level) continue;
      if (!trees.empty() && std::find(trees.begin(), trees.end(), tree) == trees.end())
        continue;
      if (spec.family_at(r, c) == CopulaFamily::Independence) continue;
      stat += std::fabs(param_to_tau(spec.edge_copula(r, c)));
    }
  return stat;
}

GibbsResult gibbs_run(const MSRVineModel& model0, const CopulaData& data,
                      const ChainConfig& cfg, const PriorSpec& prior,
                      const std::vector<std::vector<std::vector<double>>>& ml_se) {
  check_model(model0);
  if (cfg.iterations <= cfg.burnin)
    throw std::invalid_argument("gibbs_run: iterations must exceed burnin");
  if (cfg.thin < 1) throw std::invalid_argument("gibbs_run: thin must be >= 1");
  if (prior.p != model0.p) throw std::invalid_argument("gibbs_run: prior regime mismatch");

  const int p = model0.p, d = model0.d(), T = data.T;
  Rng rng = Rng::stream(cfg.seed, 0x4749424253ULL);  // "GIBBS"

  MSRVineModel cur = model0;
  // independence-proposal modes are the estimates we start from
  std::vector<std::vector<std::vector<double>>> modes(p);
  for (int k = 0; k < p; ++k) modes[k] = cur.regimes[k].params;

  GibbsResult res;
  long long accepted = 0, proposals = 0;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    // 1. state path as a block
    const auto ld = regime_log_densities(cur, data);
    auto states = sample_states(ld, cur.trans, rng);

    // 2. transition matrix (conjugate Dirichlet)
    cur.trans = update_transition(transition_counts(states, p), prior, rng);

    // 3. copula parameters, regime by regime on that regime's rows
    for (int k = 0; k < p; ++k) {
      std::vector<double> rows;
      int n = 0;
      for (int t = 0; t < T; ++t)
        if (states[t] == k + 1) {
          for (int j = 0; j < d; ++j) rows.push_back(data.at(t, j));
          ++n;
        }
      const CopulaData regime_rows{n, d, std::move(rows)};
      int nprop = 0;
      accepted += mh_update_regime(cur.regimes[k], regime_rows, modes[k],
                                   ml_se.empty() ? modes[k] : ml_se[k],
                                   cfg.proposal_weight, rng, &nprop);
      proposals += nprop;
    }

    if (cfg.on_checkpoint && cfg.checkpoint_every > 0 &&
        (iter + 1) % cfg.checkpoint_every == 0)
      cfg.on_checkpoint(iter + 1);

    if (iter >= cfg.burnin && (iter - cfg.burnin) % cfg.thin == 0) {
      PosteriorDraw draw;
      draw.regime_params.resize(p);
      for (int k = 0; k < p; ++k) draw.regime_params[k] = cur.regimes[k].params;
      draw.trans = cur.trans;
      draw.states = states;
      res.draws.push_back(std::move(draw));
    }
  }
  res.acceptance_rate = proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;

  // identification relabeling: order regimes by the statistic, ascending.
  // Label switching only arises when the regimes are exchangeable, i.e. share
  // structure and families; heterogeneous regimes keep their labels.
  bool exchangeable = p > 1;
  for (int k = 1; k < p && exchangeable; ++k)
    exchangeable = model0.regimes[k].matrix.m == model0.regimes[0].matrix.m &&
                   model0.regimes[k].families == model0.regimes[0].families &&
                   model0.regimes[k].trunc_level == model0.regimes[0].trunc_level;
  if (exchangeable) {
    for (auto& draw : res.draws) {
      std::vector<double> stat(p);
      for (int k = 0; k < p; ++k) {
        RVineSpec s = model0.regimes[k];
        s.params = draw.regime_params[k];
        stat[k] = identification_statistic(s, cfg.ident_trees);
      }
      std::vector<int> order(p);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return stat[a] < stat[b]; });
      bool identity = true;
      for (int k = 0; k < p; ++k) identity = identity && order[k] == k;
      if (identity) continue;

      std::vector<std::vector<std::vector<double>>> params(p);
      std::vector<double> P(p * p);
      std::vector<int> inv(p);
      for (int k = 0; k < p; ++k) inv[order[k]] = k;
      for (int k = 0; k < p; ++k) params[k] = std::move(draw.regime_params[order[k]]);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) P[i * p + j] = draw.trans.at(order[i], order[j]);
      for (auto& s : draw.states) s = inv[s - 1] + 1;
      draw.regime_params = std::move(params);
      draw.trans = TransitionMatrix(p, std::move(P));
    }
  }
  return res;
}

double effective_sample_size(const std::vector<double>& chain, bool* degenerate) {
  const int n = static_cast<int>(chain.size());
  if (degenerate) *degenerate = false;
  if (n < 10) throw std::invalid_argument("effective_sample_size: need at least 10 samples");
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
  double var = 0.0;
  for (double x : chain) var += (x - mean) * (x - mean);
  var /= n;
  // rounding noise on a constant chain is not variance
  if (var <= 1e-24 * (1.0 + mean * mean)) {
    if (degenerate) *degenerate = true;
    return n;
  }
  double acsum = 0.0;
  for (int k = 1; k < n; ++k) {
    double acc = 0.0;
    for (int t = 0; t + k < n; ++t) acc += (chain[t] - mean) * (chain[t + k] - mean);
    const double rho = acc / (n * var);
    if (rho <= 0.0) break;
    acsum += rho;
  }
  return n / (1.0 + 2.0 * acsum);
}

CredibleIntervals credible_intervals(std::vector<double> samples, double level) {
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw std::invalid_argument("credible_intervals: too few samples");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("credible_intervals: level outside (0,1)");
  std::sort(samples.begin(), samples.end());

  auto quantile = [&](double q) {
    // linear interpolation of order statistics (R type 7)
    const double h = (n - 1) * q;
    const int lo = static_cast<int>(std::floor(h));
    const int hi = std::min(lo + 1, n - 1);
    return samples[lo] + (h - lo) * (samples[hi] - samples[lo]);
  };
  CredibleIntervals ci;
  const double alpha = 1.0 - level;
  ci.symmetric = {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};

  const int m = std::min(n, static_cast<int>(std::ceil(level * n)));
  int best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (int i = 0; i + m - 1 < n; ++i) {
    const double width = samples[i + m - 1] - samples[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  ci.hpd = {samples[best], samples[best + m - 1]};
  return ci;
}

DicResult dic(const std::vector<PosteriorDraw>& draws, const MSRVineModel& shape,
              const CopulaData& data) {
  if (draws.empty()) throw std::invalid_argument("dic: no draws");
  const int p = shape.p, d = shape.d();

  MSRVineModel work = shape;
  auto deviance = [&](const std::vector<std::vector<std::vector<double>>>& params,
                      const TransitionMatrix& trans) {
    for (int k = 0; k < p; ++k) work.regimes[k].params = params[k];
    work.trans = trans;
    return -2.0 * ms_log_likelihood(work, data);
  };

  double mean_dev = 0.0;
  for (const auto& draw : draws) mean_dev += deviance(draw.regime_params, draw.trans);
  mean_dev /= static_cast<double>(draws.size());

  // posterior mean of the parameters, projected into the admissible domain
  DicResult res;
  std::vector<std::vector<std::vector<double>>> mean_params(p);
  for (int k = 0; k < p; ++k) {
    mean_params[k].assign(d * d, {});
    for (int c = 0; c < d; ++c)
      for (int r = c + 1; r < d; ++r) {
        const auto fam = shape.regimes[k].family_at(r, c);
        const int np = param_count(fam);
        std::vector<double> acc(np, 0.0);
        for (const auto& draw : draws)
          for (int i = 0; i < np; ++i) acc[i] += draw.regime_params[k][r * d + c][i];
        for (auto& a : acc) a /= static_cast<double>(draws.size());
        for (int i = 0; i < np; ++i) {
          double lo, hi;
          switch (fam) {
            case CopulaFamily::Gaussian:
              lo = -1.0 + 1e-6; hi = 1.0 - 1e-6; break;
            case CopulaFamily::StudentT:
              if (i == 0) { lo = -1.0 + 1e-6; hi = 1.0 - 1e-6; }
              else { lo = 2.0 + 1e-6; hi = 30.0; }
              break;
            default:
              lo = 1.0; hi = std::numeric_limits<double>::infinity(); break;
          }
          const double clamped = std::clamp(acc[i], lo, hi);
          if (clamped != acc[i]) res.projected = true;
          acc[i] = clamped;
        }
        mean_params[k][r * d + c] = std::move(acc);
      }
  }
  std::vector<double> P(p * p, 0.0);
  for (const auto& draw : draws)
    for (int i = 0; i < p * p; ++i) P[i] += draw.trans.P[i];
  for (auto& x : P) x /= static_cast<double>(draws.size());
  for (int j = 0; j < p; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < p; ++i) colsum += P[i * p + j];
    for (int i = 0; i < p; ++i) P[i * p + j] /= colsum;
  }

  const double dev_at_mean = deviance(mean_params, TransitionMatrix(p, std::move(P)));
  res.mean_deviance = mean_dev;
  res.p_d = mean_dev - dev_at_mean;
  res.dic = mean_dev + res.p_d;
  return res;
}

}  // namespace msrvine
