#include "msrvine/regime_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msrvine {

TransitionMatrix::TransitionMatrix(int regimes, std::vector<double> entries)
    : p(regimes), P(std::move(entries)) {
  if (p <= 0 || static_cast<int>(P.size()) != p * p)
    throw std::invalid_argument("TransitionMatrix: need p*p entries");
  for (int j = 0; j < p; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < p; ++i) {
      const double v = at(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("TransitionMatrix: entry outside [0,1]");
      colsum += v;
    }
    if (std::fabs(colsum - 1.0) > 1e-12)
      throw std::invalid_argument("TransitionMatrix: column " + std::to_string(j + 1) +
                                  " does not sum to 1");
  }
}

std::vector<double> stationary_distribution(const TransitionMatrix& tm) {
  const int p = tm.p;
  // primitivity check: some power of P must be strictly positive
  std::vector<double> pw = tm.P;
  bool positive = false;
  for (int iter = 0; iter < 2 * p && !positive; ++iter) {
    positive = std::all_of(pw.begin(), pw.end(), [](double x) { return x > 1e-300; });
    if (positive) break;
    std::vector<double> nx(p * p, 0.0);
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < p; ++k)
        for (int j = 0; j < p; ++j) nx[i * p + j] += pw[i * p + k] * tm.P[k * p + j];
    pw.swap(nx);
  }
  if (!positive)
    throw std::runtime_error("stationary_distribution: chain is reducible or periodic");

  // solve (P - I) pi = 0 with the normalization sum(pi) = 1 replacing one row
  std::vector<double> a(p * p), b(p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a[i * p + j] = tm.at(i, j) - (i == j ? 1.0 : 0.0);
  for (int j = 0; j < p; ++j) a[(p - 1) * p + j] = 1.0;
  b[p - 1] = 1.0;
  // Gaussian elimination with partial pivoting (p is small)
  for (int col = 0; col < p; ++col) {
    int piv = col;
    for (int r = col + 1; r < p; ++r)
      if (std::fabs(a[r * p + col]) > std::fabs(a[piv * p + col])) piv = r;
    if (std::fabs(a[piv * p + col]) < 1e-14)
      throw std::runtime_error("stationary_distribution: singular system");
    if (piv != col) {
      for (int j = 0; j < p; ++j) std::swap(a[col * p + j], a[piv * p + j]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < p; ++r) {
      const double f = a[r * p + col] / a[col * p + col];
      for (int j = col; j < p; ++j) a[r * p + j] -= f * a[col * p + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> pi(p);
  for (int r = p - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < p; ++j) s -= a[r * p + j] * pi[j];
    pi[r] = s / a[r * p + r];
  }
  double sum = 0.0;
  for (auto& x : pi) {
    x = std::max(x, 0.0);
    sum += x;
  }
  for (auto& x : pi) x /= sum;
  return pi;
}

FilterResult hamilton_filter(const RegimeLogDensities& ld, const TransitionMatrix& tm,
                             std::vector<double> init) {
  const int T = ld.T, p = ld.p;
  if (tm.p != p) throw std::invalid_argument("hamilton_filter: regime count mismatch");
  if (init.empty()) init = stationary_distribution(tm);
  if (static_cast<int>(init.size()) != p)
    throw std::invalid_argument("hamilton_filter: init length mismatch");

  FilterResult fr;
  fr.T = T;
  fr.p = p;
  fr.predicted.assign(static_cast<std::size_t>(T) * p, 0.0);
  fr.filtered.assign(static_cast<std::size_t>(T) * p, 0.0);
  fr.loglik = 0.0;

  std::vector<double> prev = init;  // filtered at t-1 (prior at t=0)
  for (int t = 0; t < T; ++t) {
    // predict
    std::vector<double> pred(p, 0.0);
    if (t == 0) {
      pred = prev;
    } else {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) pred[i] += tm.at(i, j) * prev[j];
    }
    // update in log space: log(pred_k) + ld_k, normalized by logsumexp
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> lw(p);
    for (int k = 0; k < p; ++k) {
      lw[k] = (pred[k] > 0.0 ? std::log(pred[k]) : -std::numeric_limits<double>::infinity()) +
              ld.at(t, k);
      m = std::max(m, lw[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < p; ++k) sum += std::exp(lw[k] - m);
    fr.loglik += m + std::log(sum);
    for (int k = 0; k < p; ++k) {
      fr.predicted[t * p + k] = pred[k];
      fr.filtered[t * p + k] = std::exp(lw[k] - m) / sum;
    }
    prev.assign(fr.filtered.begin() + t * p, fr.filtered.begin() + (t + 1) * p);
  }
  return fr;
}

SmootherResult kim_smoother(const FilterResult& fr, const TransitionMatrix& tm) {
  const int T = fr.T, p = fr.p;
  if (tm.p != p) throw std::invalid_argument("kim_smoother: regime count mismatch");
  SmootherResult sr;
  sr.T = T;
  sr.p = p;
  sr.smoothed.assign(static_cast<std::size_t>(T) * p, 0.0);
  sr.pairwise.assign(static_cast<std::size_t>(std::max(T - 1, 0)) * p * p, 0.0);

  for (int k = 0; k < p; ++k) sr.smoothed[(T - 1) * p + k] = fr.filtered[(T - 1) * p + k];
  for (int t = T - 2; t >= 0; --t) {
    // ratio_i = smoothed_{t+1,i} / predicted_{t+1,i}
    std::vector<double> ratio(p, 0.0);
    for (int i = 0; i < p; ++i) {
      const double pred = fr.predicted[(t + 1) * p + i];
      const double smo = sr.smoothed[(t + 1) * p + i];
      if (pred <= 0.0) {
        if (smo > 1e-12)
          throw std::runtime_error("kim_smoother: zero predicted with nonzero smoothed mass");
        ratio[i] = 0.0;
      } else {
        ratio[i] = smo / pred;
      }
    }
    double rowsum = 0.0;
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int i = 0; i < p; ++i) acc += tm.at(i, j) * ratio[i];
      const double s = acc * fr.filtered[t * p + j];
      sr.smoothed[t * p + j] = s;
      rowsum += s;
      for (int i = 0; i < p; ++i)
        sr.pairwise[(t * p + i) * p + j] =
            ratio[i] * tm.at(i, j) * fr.filtered[t * p + j];
    }
    // guard drift; the recursion preserves normalization analytically
    if (rowsum > 0.0) {
      for (int j = 0; j < p; ++j) sr.smoothed[t * p + j] /= rowsum;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) sr.pairwise[(t * p + i) * p + j] /= rowsum;
    }
  }
  return sr;
}

SmootherResult oracle_smoother(const RegimeLogDensities& ld, const TransitionMatrix& tm,
                               std::vector<double> init) {
  const int T = ld.T, p = ld.p;
  double paths = std::pow(static_cast<double>(p), T);
  if (paths > 1e6) throw std::invalid_argument("oracle_smoother: p^T exceeds 10^6");
  if (init.empty()) init = stationary_distribution(tm);

  const long n = static_cast<long>(paths + 0.5);
  std::vector<double> logw(n);
  std::vector<int> path(T);
  double maxlw = -std::numeric_limits<double>::infinity();
  for (long idx = 0; idx < n; ++idx) {
    long rem = idx;
    for (int t = 0; t < T; ++t) {
      path[t] = static_cast<int>(rem % p);
      rem /= p;
    }
    double lw = std::log(init[path[0]]) + ld.at(0, path[0]);
    for (int t = 1; t < T; ++t)
      lw += std::log(tm.at(path[t], path[t - 1])) + ld.at(t, path[t]);
    logw[idx] = lw;
    maxlw = std::max(maxlw, lw);
  }
  double total = 0.0;
  for (long idx = 0; idx < n; ++idx) total += std::exp(logw[idx] - maxlw);

  SmootherResult sr;
  sr.T = T;
  sr.p = p;
  sr.smoothed.assign(static_cast<std::size_t>(T) * p, 0.0);
  sr.pairwise.assign(static_cast<std::size_t>(std::max(T - 1, 0)) * p * p, 0.0);
  for (long idx = 0; idx < n; ++idx) {
    const double w = std::exp(logw[idx] - maxlw) / total;
    long rem = idx;
    for (int t = 0; t < T; ++t) {
      path[t] = static_cast<int>(rem % p);
      rem /= p;
    }
    for (int t = 0; t < T; ++t) sr.smoothed[t * p + path[t]] += w;
    for (int t = 0; t + 1 < T; ++t) sr.pairwise[(t * p + path[t + 1]) * p + path[t]] += w;
  }
  return sr;
}

std::vector<int> transition_counts(const std::vector<int>& path, int p) {
  std::vector<int> n(p * p, 0);
  for (int label : path)
    if (label < 1 || label > p) throw std::invalid_argument("transition_counts: label out of range");
  for (std::size_t t = 1; t < path.size(); ++t) {
    const int j = path[t - 1] - 1, i = path[t] - 1;
    ++n[i * p + j];
  }
  return n;
}

}  // namespace msrvine
