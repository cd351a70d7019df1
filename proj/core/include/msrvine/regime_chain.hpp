#pragma once

#include <cstdint>
#include <vector>

namespace msrvine {

// Column-stochastic transition matrix: P(i,j) = P(S_t = i | S_{t-1} = j).
struct TransitionMatrix {
  int p = 0;
  std::vector<double> P;  // row-major p x p

  TransitionMatrix() = default;
  TransitionMatrix(int regimes, std::vector<double> entries);  // validates columns

  double at(int i, int j) const { return P[i * p + j]; }
  double& at(int i, int j) { return P[i * p + j]; }
};

// per-observation log densities: entry (t,k) = log f(u_t | S_t = k)
struct RegimeLogDensities {
  int T = 0, p = 0;
  std::vector<double> ld;  // row-major T x p
  double at(int t, int k) const { return ld[t * p + k]; }
};

struct FilterResult {
  int T = 0, p = 0;
  std::vector<double> predicted;  // T x p, rows sum to 1
  std::vector<double> filtered;   // T x p, rows sum to 1
  double loglik = 0.0;
};

struct SmootherResult {
  int T = 0, p = 0;
  std::vector<double> smoothed;  // T x p
  std::vector<double> pairwise;  // (T-1) x p x p, (t,i,j) = P(S_{t+1}=i, S_t=j | data)
  double smoothed_at(int t, int k) const { return smoothed[t * p + k]; }
  double pairwise_at(int t, int i, int j) const { return pairwise[(t * p + i) * p + j]; }
};

// stationary distribution pi with P pi = pi; requires the chain to be
// irreducible and aperiodic (checked via positivity of a matrix power)
std::vector<double> stationary_distribution(const TransitionMatrix& P);

// forward recursion; init defaults to the stationary distribution when empty
FilterResult hamilton_filter(const RegimeLogDensities& ld, const TransitionMatrix& P,
                             std::vector<double> init = {});

SmootherResult kim_smoother(const FilterResult& fr, const TransitionMatrix& P);

// exact smoothed/pairwise probabilities by summing over all p^T state paths;
// guards p^T <= 10^6
SmootherResult oracle_smoother(const RegimeLogDensities& ld, const TransitionMatrix& P,
                               std::vector<double> init = {});

// counts of consecutive j -> i transitions; labels are 1-based in {1..p}
std::vector<int> transition_counts(const std::vector<int>& path, int p);

}  // namespace msrvine
