#pragma once

#include <functional>
#include <vector>

namespace msrvine {

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Minimizes f over R^n.  Convergence: relative spread of simplex function
// values below tol, or max_iter iterations.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step = 0.1,
                             double tol = 1e-8, int max_iter = 200);

// central-difference Hessian of f at x (row-major n x n)
std::vector<double> numeric_hessian(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x, double h = 1e-4);

// diagonal of the inverse of a symmetric n x n matrix, n <= 2; returns empty
// if the matrix is not positive definite
std::vector<double> inv_diag_spd(const std::vector<double>& a, int n);

}  // namespace msrvine
