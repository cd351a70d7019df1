#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "msrvine/ms_em.hpp"
#include "msrvine/rvine.hpp"

namespace msrvine {

// tau-b with tie correction; O(n log n) merge-sort counting.  Throws on a
// constant margin.
double empirical_kendall_tau(std::span<const double> x, std::span<const double> y);

// O(n^2) pair-counting reference, kept for tests
double kendall_tau_oracle(std::span<const double> x, std::span<const double> y);

struct WeightedGraph {
  int n = 0;
  std::vector<double> w;  // n x n symmetric, diagonal unused

  double at(int i, int j) const { return w[i * n + j]; }
};

// maximum spanning tree; ties broken toward the lexicographically smallest
// edge set.  Returns n-1 edges (i,j), i < j, sorted.
std::vector<std::pair<int, int>> mst(const WeightedGraph& g);

// tree-by-tree selection: |tau| graph -> maximum spanning tree -> AIC family
// choice per edge -> h-transform pseudo-observations, honoring the proximity
// condition between trees.  trunc < 0 means no truncation.  Optional weights
// enter the bivariate fits; edge weights stay unweighted sample tau.
RVineSpec select_structure(const CopulaData& data,
                           const std::vector<CopulaFamily>& catalogue, int trunc = -1,
                           std::span<const double> weights = {});

struct RollingReport {
  int window = 0;
  std::vector<int> starts;                       // per-window first row
  std::vector<std::vector<double>> loglik;       // candidates x windows
  std::vector<std::vector<std::uint8_t>> flagged;  // fit failed / unstable
};

// fits each candidate recipe on every length-`window` slice; slices advance by
// one row.  Failures are flagged per cell (loglik NaN), not fatal.
RollingReport rolling_window(const CopulaData& data, int window,
                             const std::vector<RegimeRecipe>& candidates,
                             int workers = 1);

}  // namespace msrvine
