#include "msrvine/pair_copula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "msrvine/optim.hpp"

namespace msrvine {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

double qnorm(double p) { return boost::math::quantile(kStdNormal, p); }
double pnorm(double x) { return boost::math::cdf(kStdNormal, x); }

double qt(double p, double nu) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}
double pt(double x, double nu) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

// ---- Gaussian ----

double gauss_logdens(double rho, double u, double v) {
  const double x = qnorm(u), y = qnorm(v);
  const double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double gauss_h(double rho, double u, double v) {
  const double x = qnorm(u), y = qnorm(v);
  return pnorm((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv(double rho, double p, double v) {
  const double y = qnorm(v);
  return pnorm(qnorm(p) * std::sqrt(1.0 - rho * rho) + rho * y);
}

// ---- Student-t ----

double t_logdens(double rho, double nu, double u, double v) {
  const double x = qt(u, nu), y = qt(v, nu);
  const double r2 = 1.0 - rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
  return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
         2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2) -
         0.5 * (nu + 2.0) * std::log1p(q) +
         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double t_h(double rho, double nu, double u, double v) {
  const double x = qt(u, nu), y = qt(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return pt((x - rho * y) / s, nu + 1.0);
}

double t_hinv(double rho, double nu, double p, double v) {
  const double y = qt(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return pt(rho * y + s * qt(p, nu + 1.0), nu);
}

// ---- Gumbel (base family, theta >= 1) ----

double gumbel_logdens(double theta, double u, double v) {
  const double tu = -std::log(u), tv = -std::log(v);
  const double lA = std::log(std::pow(tu, theta) + std::pow(tv, theta));
  const double A1t = std::exp(lA / theta);  // A^{1/theta}
  return -A1t + tu + tv + (2.0 / theta - 2.0) * lA +
         (theta - 1.0) * (std::log(tu) + std::log(tv)) +
         std::log1p((theta - 1.0) / A1t);
}

double gumbel_h(double theta, double u, double v) {
  const double tu = -std::log(u), tv = -std::log(v);
  const double lA = std::log(std::pow(tu, theta) + std::pow(tv, theta));
  // C(u,v) * A^{1/theta-1} * tv^{theta-1} / v
  return std::exp(-std::exp(lA / theta) + (1.0 / theta - 1.0) * lA +
                  (theta - 1.0) * std::log(tv) + tv);
}

// solve gumbel_h(x; v) = p for x; h is increasing in its first argument
double gumbel_hinv(double theta, double p, double v) {
  double lo = kUnitEps, hi = 1.0 - kUnitEps;
  if (gumbel_h(theta, lo, v) >= p) return lo;
  if (gumbel_h(theta, hi, v) <= p) return hi;
  double x = p;  // independence-copula guess
  for (int it = 0; it < 100; ++it) {
    const double fx = gumbel_h(theta, x, v) - p;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    const double deriv = std::exp(gumbel_logdens(theta, x, v));
    double step = fx / std::max(deriv, 1e-300);
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-12) return xn;
    x = xn;
  }
  return x;
}

struct BasePair {
  // base-family coordinates plus whether h output needs the 1-x flip
  double u, v;
  bool flip_u;
};

// map (u,v) into base-family coordinates for a rotation
BasePair rotate_args(CopulaFamily f, double u, double v) {
  switch (f) {
    case CopulaFamily::Gumbel90:  return {1.0 - u, v, true};
    case CopulaFamily::Gumbel180: return {1.0 - u, 1.0 - v, true};
    case CopulaFamily::Gumbel270: return {u, 1.0 - v, false};
    default:                      return {u, v, false};
  }
}

double check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(std::string(what) + " outside [0,1]");
  return clamp_unit(x);
}

// probability targets for the h inverse: in the joint tails h gets far below
// kUnitEps, and flattening it there would shift the inverse by whole grid cells
double clamp_prob(double p) { return std::clamp(p, 1e-300, 1.0 - 1e-16); }

double check_prob(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(std::string(what) + " outside [0,1]");
  return clamp_prob(x);
}

double normal_scores_corr(const WeightedPairSample& d) {
  // weighted correlation of normal scores; cheap moment start for the fits
  double sw = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t t = 0; t < d.u1.size(); ++t) {
    const double w = d.w[t];
    if (w <= 0.0) continue;
    const double x = qnorm(clamp_unit(d.u1[t])), y = qnorm(clamp_unit(d.u2[t]));
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    syy += w * y * y;
    sxy += w * x * y;
  }
  if (sw <= 0.0) return 0.0;
  const double vx = sxx / sw - (sx / sw) * (sx / sw);
  const double vy = syy / sw - (sy / sw) * (sy / sw);
  const double cxy = sxy / sw - (sx / sw) * (sy / sw);
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return std::clamp(cxy / std::sqrt(vx * vy), -0.999, 0.999);
}

}  // namespace

double clamp_unit(double u) { return std::clamp(u, kUnitEps, 1.0 - kUnitEps); }

int param_count(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return 0;
    case CopulaFamily::StudentT:     return 2;
    default:                         return 1;
  }
}

std::string family_tag(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return "I";
    case CopulaFamily::Gaussian:     return "N";
    case CopulaFamily::StudentT:     return "t";
    case CopulaFamily::Gumbel:       return "G";
    case CopulaFamily::Gumbel90:     return "G90";
    case CopulaFamily::Gumbel180:    return "SG";
    case CopulaFamily::Gumbel270:    return "G270";
  }
  return "?";
}

std::optional<CopulaFamily> family_from_tag(const std::string& tag) {
  if (tag == "I") return CopulaFamily::Independence;
  if (tag == "N") return CopulaFamily::Gaussian;
  if (tag == "t") return CopulaFamily::StudentT;
  if (tag == "G") return CopulaFamily::Gumbel;
  if (tag == "G90") return CopulaFamily::Gumbel90;
  if (tag == "SG") return CopulaFamily::Gumbel180;
  if (tag == "G270") return CopulaFamily::Gumbel270;
  return std::nullopt;
}

bool params_valid(CopulaFamily f, std::span<const double> p) {
  if (static_cast<int>(p.size()) != param_count(f)) return false;
  switch (f) {
    case CopulaFamily::Independence:
      return true;
    case CopulaFamily::Gaussian:
      return p[0] > -1.0 && p[0] < 1.0;
    case CopulaFamily::StudentT:
      return p[0] > -1.0 && p[0] < 1.0 && p[1] > 2.0 && p[1] <= 30.0;
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel90:
    case CopulaFamily::Gumbel180:
    case CopulaFamily::Gumbel270:
      return p[0] >= 1.0 && std::isfinite(p[0]);
  }
  return false;
}

PairCopula::PairCopula(CopulaFamily f, std::vector<double> p)
    : family(f), params(std::move(p)) {
  if (!params_valid(family, params))
    throw std::invalid_argument("invalid parameters for copula family " + family_tag(f));
}

double log_density(const PairCopula& pc, double u1, double u2) {
  const double u = check_unit(u1, "u1"), v = check_unit(u2, "u2");
  switch (pc.family) {
    case CopulaFamily::Independence:
      return 0.0;
    case CopulaFamily::Gaussian:
      return gauss_logdens(pc.params[0], u, v);
    case CopulaFamily::StudentT:
      return t_logdens(pc.params[0], pc.params[1], u, v);
    case CopulaFamily::Gumbel:
      return gumbel_logdens(pc.params[0], u, v);
    default: {
      const auto r = rotate_args(pc.family, u, v);
      return gumbel_logdens(pc.params[0], clamp_unit(r.u), clamp_unit(r.v));
    }
  }
}

double density(const PairCopula& pc, double u1, double u2) {
  return std::exp(log_density(pc, u1, u2));
}

double hfunc(const PairCopula& pc, double u1, double v1) {
  const double u = check_unit(u1, "u"), v = check_unit(v1, "v");
  switch (pc.family) {
    case CopulaFamily::Independence:
      return u;
    case CopulaFamily::Gaussian:
      return gauss_h(pc.params[0], u, v);
    case CopulaFamily::StudentT:
      return t_h(pc.params[0], pc.params[1], u, v);
    case CopulaFamily::Gumbel:
      return gumbel_h(pc.params[0], u, v);
    default: {
      const auto r = rotate_args(pc.family, u, v);
      const double h = gumbel_h(pc.params[0], clamp_unit(r.u), clamp_unit(r.v));
      return r.flip_u ? 1.0 - h : h;
    }
  }
}

double hfunc2(const PairCopula& pc, double v, double u) {
  // the swapped pair (V,U) has the same copula except 90 and 270 trade places
  switch (pc.family) {
    case CopulaFamily::Gumbel90:
      return hfunc(PairCopula(CopulaFamily::Gumbel270, pc.params), v, u);
    case CopulaFamily::Gumbel270:
      return hfunc(PairCopula(CopulaFamily::Gumbel90, pc.params), v, u);
    default:
      return hfunc(pc, v, u);
  }
}

double hinv(const PairCopula& pc, double p1, double v1) {
  const double p = check_prob(p1, "p"), v = check_unit(v1, "v");
  switch (pc.family) {
    case CopulaFamily::Independence:
      return p;
    case CopulaFamily::Gaussian:
      return gauss_hinv(pc.params[0], p, v);
    case CopulaFamily::StudentT:
      return t_hinv(pc.params[0], pc.params[1], p, v);
    case CopulaFamily::Gumbel:
      return gumbel_hinv(pc.params[0], p, v);
    case CopulaFamily::Gumbel90:
      return 1.0 - gumbel_hinv(pc.params[0], clamp_prob(1.0 - p), v);
    case CopulaFamily::Gumbel180:
      return 1.0 - gumbel_hinv(pc.params[0], clamp_prob(1.0 - p), clamp_unit(1.0 - v));
    case CopulaFamily::Gumbel270:
      return gumbel_hinv(pc.params[0], p, clamp_unit(1.0 - v));
  }
  return p;
}

std::vector<double> tau_to_param(CopulaFamily f, double tau) {
  if (!(tau > -1.0 && tau < 1.0)) throw std::domain_error("tau outside (-1,1)");
  switch (f) {
    case CopulaFamily::Independence:
      return {};
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT:
      return {std::sin(std::numbers::pi * tau / 2.0)};
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel180:
      if (tau < 0.0) throw std::domain_error("Gumbel/survival Gumbel requires tau >= 0");
      return {1.0 / (1.0 - tau)};
    case CopulaFamily::Gumbel90:
    case CopulaFamily::Gumbel270:
      if (tau > 0.0) throw std::domain_error("Gumbel90/270 requires tau <= 0");
      return {1.0 / (1.0 + tau)};
  }
  return {};
}

double param_to_tau(const PairCopula& pc) {
  switch (pc.family) {
    case CopulaFamily::Independence:
      return 0.0;
    case CopulaFamily::Gaussian:
    case CopulaFamily::StudentT:
      return 2.0 / std::numbers::pi * std::asin(pc.params[0]);
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel180:
      return 1.0 - 1.0 / pc.params[0];
    case CopulaFamily::Gumbel90:
    case CopulaFamily::Gumbel270:
      return -(1.0 - 1.0 / pc.params[0]);
  }
  return 0.0;
}

double weighted_loglik(CopulaFamily f, std::span<const double> params,
                       const WeightedPairSample& data) {
  PairCopula pc(f, std::vector<double>(params.begin(), params.end()));
  double ll = 0.0;
  for (std::size_t t = 0; t < data.u1.size(); ++t) {
    if (data.w[t] == 0.0) continue;
    ll += data.w[t] * log_density(pc, data.u1[t], data.u2[t]);
  }
  return ll;
}

namespace {

// unconstrained transforms per family (rho via artanh, theta via log(theta-1),
// nu via log(nu-2) with hard cap 30)
std::vector<double> to_unconstrained(CopulaFamily f, const std::vector<double>& p) {
  switch (f) {
    case CopulaFamily::Gaussian:
      return {std::atanh(std::clamp(p[0], -0.999, 0.999))};
    case CopulaFamily::StudentT:
      return {std::atanh(std::clamp(p[0], -0.999, 0.999)),
              std::log(std::clamp(p[1], 2.0 + 1e-6, 30.0) - 2.0)};
    default:
      return {std::log(std::max(p[0], 1.0 + 1e-6) - 1.0)};
  }
}

std::vector<double> to_natural(CopulaFamily f, const std::vector<double>& x) {
  switch (f) {
    case CopulaFamily::Gaussian:
      return {std::tanh(x[0])};
    case CopulaFamily::StudentT:
      return {std::tanh(x[0]), std::min(2.0 + std::exp(std::min(x[1], 20.0)), 30.0)};
    default:
      return {1.0 + std::exp(std::min(x[0], 20.0))};
  }
}

std::vector<double> tau_start(CopulaFamily f, const WeightedPairSample& data) {
  const double rho = normal_scores_corr(data);
  const double tau = 2.0 / std::numbers::pi * std::asin(rho);
  switch (f) {
    case CopulaFamily::Gaussian:
      return {rho};
    case CopulaFamily::StudentT:
      return {rho, 10.0};
    case CopulaFamily::Gumbel:
    case CopulaFamily::Gumbel180:
      return {1.0 / (1.0 - std::clamp(tau, 0.05, 0.94))};
    case CopulaFamily::Gumbel90:
    case CopulaFamily::Gumbel270:
      return {1.0 / (1.0 + std::clamp(tau, -0.94, -0.05))};
    default:
      return {};
  }
}

}  // namespace

PairFitResult fit_weighted(CopulaFamily f, const WeightedPairSample& data) {
  if (data.u1.empty() || data.u1.size() != data.u2.size() ||
      data.u1.size() != data.w.size())
    throw std::invalid_argument("fit_weighted: empty or inconsistent sample");
  double wsum = 0.0, wsq = 0.0;
  for (double w : data.w) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("fit_weighted: weights must be finite and nonnegative");
    wsum += w;
    wsq += w * w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("fit_weighted: all weights zero");

  PairFitResult res;
  if (f == CopulaFamily::Independence) {
    res.loglik = 0.0;
    return res;
  }

  // weights concentrated on too few rows (EM starving a regime): tau-inversion
  // fallback.  Uniform weights over a small sample are fine and fit normally.
  const double ess = wsum * wsum / wsq;
  if (ess < 10.0 && ess < data.u1.size() * (1.0 - 1e-9)) {
    res.params = tau_start(f, data);
    res.loglik = weighted_loglik(f, res.params, data);
    res.se = std::vector<double>(res.params.size(), 0.1);
    res.fallback = true;
    return res;
  }

  auto neg_ll = [&](const std::vector<double>& x) {
    const auto p = to_natural(f, x);
    if (!params_valid(f, p)) return 1e300;
    return -weighted_loglik(f, p, data);
  };

  const auto x0 = to_unconstrained(f, tau_start(f, data));
  auto nm = nelder_mead(neg_ll, x0, 0.25, 1e-8, 200);
  // restart with a fresh simplex: guards against premature collapse
  for (double step : {0.05, 0.01}) {
    const auto again = nelder_mead(neg_ll, nm.x, step, 1e-10, 200);
    if (again.fval < nm.fval) nm = again;
  }
  res.params = to_natural(f, nm.x);
  res.loglik = -nm.fval;
  res.converged = nm.converged;

  // boundary diagnostics on the natural scale
  switch (f) {
    case CopulaFamily::StudentT:
      res.boundary = res.params[1] >= 30.0 - 1e-6 || std::fabs(res.params[0]) > 0.9985;
      break;
    case CopulaFamily::Gaussian:
      res.boundary = std::fabs(res.params[0]) > 0.9985;
      break;
    default:
      res.boundary = res.params[0] < 1.0 + 1e-4 || res.params[0] > 50.0;
      break;
  }

  // standard errors from the observed information in natural parameters
  auto neg_ll_nat = [&](const std::vector<double>& p) {
    if (!params_valid(f, p)) return 1e300;
    return -weighted_loglik(f, p, data);
  };
  const int n = param_count(f);
  const auto hess = numeric_hessian(neg_ll_nat, res.params, 1e-4);
  const auto diag = inv_diag_spd(hess, n);
  res.se.assign(n, 0.1);
  if (!diag.empty())
    for (int i = 0; i < n; ++i)
      if (diag[i] > 0.0 && std::isfinite(diag[i])) res.se[i] = std::sqrt(diag[i]);
  return res;
}

PairCopula select_family(const WeightedPairSample& data,
                         const std::vector<CopulaFamily>& catalogue) {
  if (catalogue.empty()) throw std::invalid_argument("select_family: empty catalogue");
  bool have_best = false;
  double best_aic = 0.0;
  PairCopula best;
  std::string last_error;
  for (const auto f : catalogue) {
    try {
      const auto fit = fit_weighted(f, data);
      const double aic = -2.0 * fit.loglik + 2.0 * param_count(f);
      if (!have_best || aic < best_aic) {
        have_best = true;
        best_aic = aic;
        best = PairCopula(f, fit.params);
      }
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  if (!have_best)
    throw std::runtime_error("select_family: all catalogue fits failed: " + last_error);
  return best;
}

}  // namespace msrvine
