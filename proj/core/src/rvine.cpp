#include "msrvine/rvine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "msrvine/rng.hpp"

namespace msrvine {

RVineMatrix::RVineMatrix(int dim, std::vector<int> entries) : d(dim), m(std::move(entries)) {
  if (d <= 0 || static_cast<int>(m.size()) != d * d)
    throw std::invalid_argument("RVineMatrix: need d*d entries");
}

ValidityReport validate_matrix(const RVineMatrix& mat) {
  const int d = mat.d;
  // diagonal must be a permutation of 1..d
  std::vector<int> seen(d + 1, 0);
  for (int c = 0; c < d; ++c) {
    const int v = mat.at(c, c);
    if (v < 1 || v > d) return {false, "diagonal entry out of range"};
    if (seen[v]++) return {false, "diagonal not a permutation"};
  }
  for (int c = 0; c < d; ++c)
    for (int r = c; r < d; ++r) {
      const int v = mat.at(r, c);
      if (v < 1 || v > d)
        return {false, "entry out of range at (" + std::to_string(r + 1) + "," +
                           std::to_string(c + 1) + ")"};
    }
  // column nesting: entries of column c are a subset of column c-1's entries
  for (int c = 1; c < d; ++c) {
    std::set<int> prev, cur;
    for (int r = c - 1; r < d; ++r) prev.insert(mat.at(r, c - 1));
    for (int r = c; r < d; ++r) cur.insert(mat.at(r, c));
    if (static_cast<int>(cur.size()) != d - c)
      return {false, "repeated entry in column " + std::to_string(c + 1)};
    if (!std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()))
      return {false, "column " + std::to_string(c + 1) +
                         " not nested in column " + std::to_string(c)};
  }

  // relabel to natural order (diagonal d..1) and check the proximity condition
  std::vector<int> relabel(d + 1, 0);
  for (int c = 0; c < d; ++c) relabel[mat.at(c, c)] = d - c;
  std::vector<int> M(d * d, 0);
  for (int c = 0; c < d; ++c)
    for (int r = c; r < d; ++r) M[r * d + c] = relabel[mat.at(r, c)];

  for (int c = 0; c < d - 1; ++c) {
    for (int r = c + 1; r < d; ++r) {
      int mmax = 0;
      for (int k = r; k < d; ++k) mmax = std::max(mmax, M[k * d + c]);
      const int j = d - mmax;  // column whose diagonal is mmax
      const auto coord = "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
      if (j <= c || j >= d) return {false, "proximity violated at " + coord};
      if (mmax == M[r * d + c]) {
        std::multiset<int> need, have;
        for (int k = r + 1; k < d; ++k) need.insert(M[k * d + c]);
        for (int k = r + 1; k < d; ++k) have.insert(M[k * d + j]);
        if (need != have) return {false, "proximity violated at " + coord};
      } else {
        if (r + 1 >= d || M[(r + 1) * d + j] != M[r * d + c])
          return {false, "proximity violated at " + coord};
        std::multiset<int> need, have;
        for (int k = r + 1; k < d; ++k) need.insert(M[k * d + c]);
        have.insert(d - j);
        for (int k = r + 2; k < d; ++k) have.insert(M[k * d + j]);
        if (need != have) return {false, "proximity violated at " + coord};
      }
    }
  }
  return {true, ""};
}

VinePlan make_plan(const RVineMatrix& mat) {
  const auto report = validate_matrix(mat);
  if (!report.valid)
    throw std::invalid_argument("invalid R-vine matrix: " + report.message);
  const int d = mat.d;
  VinePlan plan;
  plan.d = d;
  std::vector<int> relabel(d + 1, 0);
  plan.data_col.resize(d);
  for (int c = 0; c < d; ++c) {
    relabel[mat.at(c, c)] = d - c;
    plan.data_col[c] = mat.at(c, c) - 1;
  }
  plan.M.assign(d * d, 0);
  for (int c = 0; c < d; ++c)
    for (int r = c; r < d; ++r) plan.M[r * d + c] = relabel[mat.at(r, c)];
  plan.use_direct.assign(d * d, 0);
  plan.src_col.assign(d * d, 0);
  for (int c = 0; c < d - 1; ++c)
    for (int r = c + 1; r < d; ++r) {
      int mmax = 0;
      for (int k = r; k < d; ++k) mmax = std::max(mmax, plan.M[k * d + c]);
      plan.use_direct[r * d + c] = (mmax == plan.M[r * d + c]);
      plan.src_col[r * d + c] = d - mmax;
    }
  return plan;
}

RVineSpec make_spec(const RVineMatrix& m, const std::vector<CopulaFamily>& families,
                    int trunc_level) {
  const int d = m.d;
  if (static_cast<int>(families.size()) != d * d)
    throw std::invalid_argument("make_spec: families must be d*d");
  if (trunc_level < 0 || trunc_level > d - 1)
    throw std::invalid_argument("make_spec: trunc level out of range");
  RVineSpec spec;
  spec.matrix = m;
  spec.families = families;
  spec.params.assign(d * d, {});
  spec.trunc_level = trunc_level;
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r)
      if (spec.tree_of_row(r) > trunc_level) spec.families[r * d + c] = CopulaFamily::Independence;
  return spec;
}

void check_spec(const RVineSpec& spec) {
  const auto report = validate_matrix(spec.matrix);
  if (!report.valid)
    throw std::invalid_argument("invalid R-vine matrix: " + report.message);
  const int d = spec.d();
  if (static_cast<int>(spec.families.size()) != d * d ||
      static_cast<int>(spec.params.size()) != d * d)
    throw std::invalid_argument("spec: family/param storage size mismatch");
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) {
      const auto f = spec.family_at(r, c);
      if (spec.tree_of_row(r) > spec.trunc_level && f != CopulaFamily::Independence)
        throw std::invalid_argument("spec: non-independence edge above truncation level");
      if (!params_valid(f, spec.params_at(r, c)))
        throw std::invalid_argument("spec: invalid parameters at edge (" +
                                    std::to_string(r + 1) + "," + std::to_string(c + 1) + ")");
    }
}

CopulaData make_copula_data(int T, int d, std::vector<double> values) {
  if (T < 0 || d <= 0 || static_cast<int>(values.size()) != T * d)
    throw std::invalid_argument("make_copula_data: size mismatch");
  for (auto& v : values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("make_copula_data: entries must be in [0,1]");
    v = clamp_unit(v);
  }
  return {T, d, std::move(values)};
}

namespace {

// one forward sweep of the h-function recursion for a single observation;
// returns the log density and leaves the pseudo-observation stores filled
double density_sweep(const RVineSpec& spec, const VinePlan& plan,
                     std::span<const double> u_row, std::vector<double>& vd,
                     std::vector<double>& vi) {
  const int d = plan.d;
  for (int c = 0; c < d; ++c) vd[(d - 1) * d + c] = clamp_unit(u_row[plan.data_col[c]]);
  double ll = 0.0;
  for (int c = d - 2; c >= 0; --c) {
    for (int r = d - 1; r > c; --r) {
      const double zr1 = vd[r * d + c];
      const int j = plan.src_col[r * d + c];
      const double zr2 = plan.use_direct[r * d + c] ? vd[r * d + j] : vi[r * d + j];
      const auto fam = spec.family_at(r, c);
      if (fam == CopulaFamily::Independence) {
        vd[(r - 1) * d + c] = zr1;
        vi[(r - 1) * d + c] = zr2;
      } else {
        const PairCopula pc = spec.edge_copula(r, c);
        ll += log_density(pc, zr1, zr2);
        vd[(r - 1) * d + c] = clamp_unit(hfunc(pc, zr1, zr2));
        vi[(r - 1) * d + c] = clamp_unit(hfunc2(pc, zr2, zr1));
      }
    }
  }
  return ll;
}

}  // namespace

double log_density(const RVineSpec& spec, std::span<const double> u_row) {
  if (static_cast<int>(u_row.size()) != spec.d())
    throw std::invalid_argument("log_density: row dimension mismatch");
  const auto plan = make_plan(spec.matrix);
  const int d = plan.d;
  std::vector<double> vd(d * d), vi(d * d);
  return density_sweep(spec, plan, u_row, vd, vi);
}

std::vector<double> log_density_rows(const RVineSpec& spec, const CopulaData& data) {
  if (data.d != spec.d()) throw std::invalid_argument("log_density_rows: dimension mismatch");
  const auto plan = make_plan(spec.matrix);
  const int d = plan.d;
  std::vector<double> out(data.T);
  std::vector<double> vd(d * d), vi(d * d);
  for (int t = 0; t < data.T; ++t) out[t] = density_sweep(spec, plan, data.row(t), vd, vi);
  return out;
}

CopulaData sample(const RVineSpec& spec, int n, std::uint64_t seed) {
  check_spec(spec);
  const auto plan = make_plan(spec.matrix);
  const int d = plan.d;
  std::vector<double> out(static_cast<std::size_t>(n) * d);
  std::vector<double> vd(d * d), vi(d * d);
  Rng rng = Rng::stream(seed, 0x53414d50ULL);  // "SAMP"
  for (int t = 0; t < n; ++t) {
    for (int c = d - 1; c >= 0; --c) {
      double q = rng.uniform();
      // invert the conditional cdf of the diagonal variable, innermost first
      for (int r = c + 1; r < d; ++r) {
        const int j = plan.src_col[r * d + c];
        const double zr2 = plan.use_direct[r * d + c] ? vd[r * d + j] : vi[r * d + j];
        q = clamp_unit(hinv(spec.edge_copula(r, c), q, zr2));
      }
      out[t * d + plan.data_col[c]] = q;
      vd[(d - 1) * d + c] = q;
      for (int r = d - 1; r > c; --r) {
        const double zr1 = vd[r * d + c];
        const int j = plan.src_col[r * d + c];
        const double zr2 = plan.use_direct[r * d + c] ? vd[r * d + j] : vi[r * d + j];
        const PairCopula pc = spec.edge_copula(r, c);
        vd[(r - 1) * d + c] = clamp_unit(hfunc(pc, zr1, zr2));
        vi[(r - 1) * d + c] = clamp_unit(hfunc2(pc, zr2, zr1));
      }
    }
  }
  return CopulaData{n, d, std::move(out)};
}

SeqFitResult fit_sequential(const RVineMatrix& matrix,
                            const std::vector<CopulaFamily>& families,
                            const CopulaData& data, std::span<const double> weights,
                            int trunc_level) {
  const auto plan = make_plan(matrix);
  const int d = plan.d;
  const int T = data.T;
  if (data.d != d) throw std::invalid_argument("fit_sequential: dimension mismatch");
  if (static_cast<int>(weights.size()) != T)
    throw std::invalid_argument("fit_sequential: weights length mismatch");
  if (trunc_level < 0) trunc_level = d - 1;

  SeqFitResult res;
  res.spec = make_spec(matrix, families, trunc_level);
  res.se.assign(d * d, {});
  res.fallback.assign(d * d, 0);

  // pseudo-observation stores, one T-vector per matrix cell
  std::vector<std::vector<double>> vd(d * d), vi(d * d);
  for (int c = 0; c < d; ++c) {
    vd[(d - 1) * d + c].resize(T);
    for (int t = 0; t < T; ++t)
      vd[(d - 1) * d + c][t] = clamp_unit(data.at(t, plan.data_col[c]));
  }
  std::vector<double> wv(weights.begin(), weights.end());

  for (int c = d - 2; c >= 0; --c) {
    for (int r = d - 1; r > c; --r) {
      const int j = plan.src_col[r * d + c];
      const auto& zr1 = vd[r * d + c];
      const auto& zr2 = plan.use_direct[r * d + c] ? vd[r * d + j] : vi[r * d + j];
      const auto fam = res.spec.families[r * d + c];
      auto& vd_next = vd[(r - 1) * d + c];
      auto& vi_next = vi[(r - 1) * d + c];
      if (fam == CopulaFamily::Independence) {
        vd_next = zr1;
        vi_next = zr2;
        continue;
      }
      WeightedPairSample edge_sample{zr1, zr2, wv};
      PairFitResult fit;
      try {
        fit = fit_weighted(fam, edge_sample);
      } catch (const std::exception& e) {
        throw std::runtime_error("fit_sequential: edge (" + std::to_string(r + 1) + "," +
                                 std::to_string(c + 1) + "): " + e.what());
      }
      res.spec.params[r * d + c] = fit.params;
      res.se[r * d + c] = fit.se;
      res.fallback[r * d + c] = fit.fallback;
      const PairCopula pc(fam, fit.params);
      vd_next.resize(T);
      vi_next.resize(T);
      for (int t = 0; t < T; ++t) {
        vd_next[t] = clamp_unit(hfunc(pc, zr1[t], zr2[t]));
        vi_next[t] = clamp_unit(hfunc2(pc, zr2[t], zr1[t]));
      }
    }
  }
  return res;
}

RVineSpec truncate(RVineSpec spec, int level) {
  const int d = spec.d();
  if (level < 0 || level > d - 1) throw std::invalid_argument("truncate: level out of range");
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r)
      if (spec.tree_of_row(r) > level) {
        spec.families[r * d + c] = CopulaFamily::Independence;
        spec.params[r * d + c].clear();
      }
  spec.trunc_level = level;
  return spec;
}

}  // namespace msrvine
