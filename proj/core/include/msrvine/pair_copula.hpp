#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msrvine {

// Bivariate copula families.  Gumbel90/Gumbel180/Gumbel270 are the rotations
// c90(u,v) = c(1-u,v), c180(u,v) = c(1-u,1-v) (survival), c270(u,v) = c(u,1-v).
enum class CopulaFamily {
  Independence,
  Gaussian,
  StudentT,
  Gumbel,
  Gumbel90,
  Gumbel180,
  Gumbel270,
};

int param_count(CopulaFamily f);

// serialization tags: "I","N","t","G","G90","SG","G270"
std::string family_tag(CopulaFamily f);
std::optional<CopulaFamily> family_from_tag(const std::string& tag);

bool params_valid(CopulaFamily f, std::span<const double> p);

// u-coordinates are clamped to [kUnitEps, 1-kUnitEps] before evaluation
inline constexpr double kUnitEps = 1e-10;
double clamp_unit(double u);

struct PairCopula {
  CopulaFamily family = CopulaFamily::Independence;
  std::vector<double> params;

  PairCopula() = default;
  PairCopula(CopulaFamily f, std::vector<double> p);  // throws std::invalid_argument
};

// copula density c(u1,u2); throws std::domain_error for inputs outside [0,1]
double density(const PairCopula& pc, double u1, double u2);
double log_density(const PairCopula& pc, double u1, double u2);

// h(u;v) = dC(u,v)/dv, the conditional cdf of u given v
double hfunc(const PairCopula& pc, double u, double v);

// conditional cdf of the second argument given the first, dC(u,v)/du.
// Equals hfunc of the swapped pair, whose copula maps 90 <-> 270.
double hfunc2(const PairCopula& pc, double v, double u);

// inverse of hfunc in its first argument; closed form where available,
// otherwise bracketed Newton/bisection to 1e-10
double hinv(const PairCopula& pc, double p, double v);

// Kendall's tau maps.  For StudentT only rho is mapped; nu comes separately.
std::vector<double> tau_to_param(CopulaFamily f, double tau);
double param_to_tau(const PairCopula& pc);

struct WeightedPairSample {
  std::vector<double> u1, u2, w;
};

struct PairFitResult {
  std::vector<double> params;
  double loglik = 0.0;
  std::vector<double> se;  // from the numerical Hessian at the optimum
  bool converged = true;
  bool boundary = false;  // parameter pinned at its admissible boundary
  bool fallback = false;  // tau-inversion fallback (degenerate weights)
};

// weighted ML fit: maximizes sum_t w_t log c(u1_t,u2_t)
PairFitResult fit_weighted(CopulaFamily f, const WeightedPairSample& data);

// AIC selection over a catalogue; ties broken by catalogue order
PairCopula select_family(const WeightedPairSample& data,
                         const std::vector<CopulaFamily>& catalogue);

// weighted log likelihood at given parameters (used by fitting and MCMC)
double weighted_loglik(CopulaFamily f, std::span<const double> params,
                       const WeightedPairSample& data);

}  // namespace msrvine
