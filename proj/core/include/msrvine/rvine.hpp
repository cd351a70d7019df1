#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msrvine/pair_copula.hpp"

namespace msrvine {

// Lower-triangular structure matrix, 1-based variable labels in {1..d}.
// Entry (r,c) is stored row-major; only r >= c is meaningful.
struct RVineMatrix {
  int d = 0;
  std::vector<int> m;  // d*d row-major

  RVineMatrix() = default;
  RVineMatrix(int dim, std::vector<int> entries);

  int at(int r, int c) const { return m[r * d + c]; }
  int& at(int r, int c) { return m[r * d + c]; }
};

struct ValidityReport {
  bool valid = true;
  std::string message;
};

// diagonal permutation + column nesting + the proximity (mmax) condition
ValidityReport validate_matrix(const RVineMatrix& m);

// One regime's full copula: structure + per-edge families and parameters.
// Edge (r,c), r > c, pairs variable m(c,c) (first copula argument) with
// m(r,c) (second argument) given {m(r+1,c),...,m(d-1,c)}.  Edge (r,c) lives
// on tree d-r (0-based rows), so the bottom row is tree 1.
struct RVineSpec {
  RVineMatrix matrix;
  std::vector<CopulaFamily> families;           // d*d row-major, r > c used
  std::vector<std::vector<double>> params;      // d*d row-major
  int trunc_level = 0;                          // trees above this are independence

  int d() const { return matrix.d; }
  int tree_of_row(int r) const { return matrix.d - r; }
  CopulaFamily family_at(int r, int c) const { return families[r * matrix.d + c]; }
  const std::vector<double>& params_at(int r, int c) const { return params[r * matrix.d + c]; }
  PairCopula edge_copula(int r, int c) const {
    return PairCopula(family_at(r, c), params_at(r, c));
  }
};

// constructs a spec with the given families; params default-initialized empty
RVineSpec make_spec(const RVineMatrix& m, const std::vector<CopulaFamily>& families,
                    int trunc_level);

// throws std::invalid_argument if the spec is inconsistent
void check_spec(const RVineSpec& spec);

struct CopulaData {
  int T = 0, d = 0;
  std::vector<double> u;  // row-major T x d, entries clamped into (0,1)
  double at(int t, int j) const { return u[t * d + j]; }
  std::span<const double> row(int t) const { return {u.data() + t * d, static_cast<std::size_t>(d)}; }
};

CopulaData make_copula_data(int T, int d, std::vector<double> values);

// Precomputed evaluation order for the h-function recursion: the matrix is
// relabeled to natural order (diagonal d..1) and each edge knows whether its
// second pseudo-observation comes from the direct or indirect store.
struct VinePlan {
  int d = 0;
  std::vector<int> M;           // relabeled matrix
  std::vector<int> data_col;    // per column: 0-based original variable on the diagonal
  std::vector<std::uint8_t> use_direct;  // per cell (r,c)
  std::vector<int> src_col;     // per cell (r,c): column holding the second argument
};

VinePlan make_plan(const RVineMatrix& m);  // throws if the matrix is invalid

double log_density(const RVineSpec& spec, std::span<const double> u_row);
std::vector<double> log_density_rows(const RVineSpec& spec, const CopulaData& data);

// i.i.d. sample by inverse Rosenblatt transform; deterministic given seed
CopulaData sample(const RVineSpec& spec, int n, std::uint64_t seed);

struct SeqFitResult {
  RVineSpec spec;
  std::vector<std::vector<double>> se;       // d*d row-major, per-edge standard errors
  std::vector<std::uint8_t> fallback;        // tau-inversion fallback used at this edge
};

// Weighted sequential (stepwise) estimation, tree by tree through the matrix
// recursion.  Families fixed per edge; Independence edges are skipped.
SeqFitResult fit_sequential(const RVineMatrix& matrix,
                            const std::vector<CopulaFamily>& families,
                            const CopulaData& data, std::span<const double> weights,
                            int trunc_level = -1);

// families above tree `level` become Independence, params cleared
RVineSpec truncate(RVineSpec spec, int level);

}  // namespace msrvine
