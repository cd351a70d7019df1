#include "msrvine/optim.hpp"

#include <algorithm>
#include <cmath>

namespace msrvine {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step, double tol,
                             int max_iter) {
  const int n = static_cast<int>(x0.size());
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1][i] += step;
  for (int i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  NelderMeadResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // order by function value
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> p2(n + 1);
      std::vector<double> f2(n + 1);
      for (int i = 0; i <= n; ++i) {
        p2[i] = pts[idx[i]];
        f2[i] = fv[idx[i]];
      }
      pts.swap(p2);
      fv.swap(f2);
    }
    const double spread = std::fabs(fv[n] - fv[0]);
    if (spread <= tol * (std::fabs(fv[0]) + tol)) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (int j = 0; j < n; ++j) x[j] = centroid[j] + coef * (pts[n][j] - centroid[j]);
      return x;
    };

    auto xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      auto xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        fv[n] = fe;
      } else {
        pts[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      pts[n] = xr;
      fv[n] = fr;
    } else {
      auto xc = blend(fr < fv[n] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        pts[n] = xc;
        fv[n] = fc;
      } else {
        // shrink toward the best point
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= static_cast<int>(x0.size()); ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = pts[best];
  res.fval = fv[best];
  res.iterations = iter;
  return res;
}

std::vector<double> numeric_hessian(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x, double h) {
  const int n = static_cast<int>(x.size());
  std::vector<double> hess(n * n, 0.0);
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    const double hi = h * std::max(1.0, std::fabs(x[i]));
    for (int j = i; j < n; ++j) {
      const double hj = h * std::max(1.0, std::fabs(x[j]));
      if (i == j) {
        auto xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        hess[i * n + i] = (f(xp) - 2.0 * f0 + f(xm)) / (hi * hi);
      } else {
        auto xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += hi; xpp[j] += hj;
        xpm[i] += hi; xpm[j] -= hj;
        xmp[i] -= hi; xmp[j] += hj;
        xmm[i] -= hi; xmm[j] -= hj;
        hess[i * n + j] = hess[j * n + i] =
            (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * hi * hj);
      }
    }
  }
  return hess;
}

std::vector<double> inv_diag_spd(const std::vector<double>& a, int n) {
  if (n == 1) {
    if (a[0] <= 0.0) return {};
    return {1.0 / a[0]};
  }
  if (n == 2) {
    const double det = a[0] * a[3] - a[1] * a[2];
    if (a[0] <= 0.0 || det <= 0.0) return {};
    return {a[3] / det, a[0] / det};
  }
  return {};
}

}  // namespace msrvine
