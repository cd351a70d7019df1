#include "msrvine/structure_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace msrvine {

namespace {

// inversion count of v by merge sort (strict inversions only)
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp, int lo,
                           int hi) {
  if (hi - lo < 2) return 0;
  const int mid = (lo + hi) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  int i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

long long tie_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long long s = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const long long t = static_cast<long long>(j - i);
    s += t * (t - 1) / 2;
    i = j;
  }
  return s;
}

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// a selected edge: conditioned pair (a,b|cond), the fitted copula, and the
// two pseudo-observation columns it exports to the next tree
struct SelEdge {
  int a = 0, b = 0;          // conditioned labels, a < b, 1-based
  std::vector<int> all;      // sorted {a,b} union conditioning set
  int n1 = -1, n2 = -1;      // endpoints in the previous tree's node space
  CopulaFamily family = CopulaFamily::Independence;
  std::vector<double> params;
  int first_arg = 0;         // conditioned label fed as the fit's first argument
  std::vector<double> pa, pb;  // F(a | rest), F(b | rest)
  bool alive = true;
};

CopulaFamily swapped_family(CopulaFamily f) {
  if (f == CopulaFamily::Gumbel90) return CopulaFamily::Gumbel270;
  if (f == CopulaFamily::Gumbel270) return CopulaFamily::Gumbel90;
  return f;
}

bool tau_indep(double tau, int n) {
  // asymptotic normal test at the 5% one-sided level
  const double stat =
      std::fabs(tau) * std::sqrt(9.0 * n * (n - 1.0)) / std::sqrt(2.0 * (2.0 * n + 5.0));
  return stat < 1.645;
}

}  // namespace

double empirical_kendall_tau(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("kendall_tau: need matching samples of size >= 2");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (x[i] != x[j]) return x[i] < x[j];
    return y[i] < y[j];
  });

  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  long long n1 = 0, n3 = 0;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const long long t = j - i;
    n1 += t * (t - 1) / 2;
    for (int k = i; k < j;) {
      int l = k;
      while (l < j && y[order[l]] == y[order[k]]) ++l;
      const long long u = l - k;
      n3 += u * (u - 1) / 2;
      k = l;
    }
    i = j;
  }
  const long long n2 = tie_pairs(std::vector<double>(y.begin(), y.end()));
  if (n1 == n0 || n2 == n0) throw std::invalid_argument("kendall_tau: constant margin");

  std::vector<double> ys(n), tmp(n);
  for (int i = 0; i < n; ++i) ys[i] = y[order[i]];
  const long long swaps = count_inversions(ys, tmp, 0, n);

  const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  const double den = std::sqrt(static_cast<double>(n0 - n1)) *
                     std::sqrt(static_cast<double>(n0 - n2));
  return num / den;
}

double kendall_tau_oracle(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("kendall_tau: need matching samples of size >= 2");
  long long num = 0, tx = 0, ty = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0) ++tx;
      if (dy == 0.0) ++ty;
      num += (dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0)) * (dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0));
    }
  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  if (tx == n0 || ty == n0) throw std::invalid_argument("kendall_tau: constant margin");
  return num / (std::sqrt(static_cast<double>(n0 - tx)) *
                std::sqrt(static_cast<double>(n0 - ty)));
}

std::vector<std::pair<int, int>> mst(const WeightedGraph& g) {
  const int n = g.n;
  if (n < 2 || static_cast<int>(g.w.size()) != n * n)
    throw std::invalid_argument("mst: need n >= 2 nodes and an n*n weight matrix");
  struct E {
    double w;
    int i, j;
  };
  std::vector<E> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (g.at(i, j) >= 0.0) edges.push_back({g.at(i, j), i, j});
  // heaviest first; equal weights resolved toward the lexicographically
  // smallest edge so ties are reproducible
  std::stable_sort(edges.begin(), edges.end(), [](const E& a, const E& b) {
    if (a.w != b.w) return a.w > b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  Dsu dsu(n);
  std::vector<std::pair<int, int>> out;
  for (const auto& e : edges)
    if (dsu.unite(e.i, e.j)) out.emplace_back(e.i, e.j);
  if (static_cast<int>(out.size()) != n - 1)
    throw std::invalid_argument("mst: graph is not connected");
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// fits one selected edge on its pseudo-observation pair and fills the copula
// and exported pseudo-observations
void finish_edge(SelEdge& e, const std::vector<double>& s1, const std::vector<double>& s2,
                 int first_label, const std::vector<double>& w,
                 const std::vector<CopulaFamily>& catalogue, bool force_indep, int tree) {
  const int T = static_cast<int>(s1.size());
  e.first_arg = first_label;
  double tau = 0.0;
  if (!force_indep) {
    try {
      tau = empirical_kendall_tau(s1, s2);
    } catch (const std::invalid_argument&) {
      force_indep = true;  // collapsed pseudo-observations
    }
  }
  if (force_indep || tau_indep(tau, T)) {
    e.family = CopulaFamily::Independence;
    e.params.clear();
  } else {
    try {
      const PairCopula pc = select_family({s1, s2, w}, catalogue);
      e.family = pc.family;
      e.params = pc.params;
    } catch (const std::exception& ex) {
      throw std::runtime_error("select_structure: tree " + std::to_string(tree) + ": " +
                               ex.what());
    }
  }
  const PairCopula pc(e.family, e.params);
  std::vector<double> p1(T), p2(T);
  for (int t = 0; t < T; ++t) {
    p1[t] = clamp_unit(hfunc(pc, s1[t], s2[t]));
    p2[t] = clamp_unit(hfunc2(pc, s2[t], s1[t]));
  }
  // p1 belongs to the first-argument label
  if (first_label == e.a) {
    e.pa = std::move(p1);
    e.pb = std::move(p2);
  } else {
    e.pa = std::move(p2);
    e.pb = std::move(p1);
  }
}

}  // namespace

RVineSpec select_structure(const CopulaData& data,
                           const std::vector<CopulaFamily>& catalogue, int trunc,
                           std::span<const double> weights) {
  const int d = data.d, T = data.T;
  if (d < 2) throw std::invalid_argument("select_structure: need d >= 2");
  if (T < 3) throw std::invalid_argument("select_structure: need at least 3 rows");
  if (catalogue.empty()) throw std::invalid_argument("select_structure: empty catalogue");
  if (trunc < 0) trunc = d - 1;
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(T, 1.0);
  if (static_cast<int>(w.size()) != T)
    throw std::invalid_argument("select_structure: weights length mismatch");

  std::vector<std::vector<SelEdge>> trees;  // trees[k] holds tree k+1

  // tree 1 on the raw columns
  {
    std::vector<std::vector<double>> cols(d);
    for (int j = 0; j < d; ++j) {
      cols[j].resize(T);
      for (int t = 0; t < T; ++t) cols[j][t] = clamp_unit(data.at(t, j));
    }
    WeightedGraph g{d, std::vector<double>(d * d, 0.0)};
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double tau = std::fabs(empirical_kendall_tau(cols[i], cols[j]));
        g.w[i * d + j] = g.w[j * d + i] = tau;
      }
    std::vector<SelEdge> tree;
    for (const auto& [i, j] : mst(g)) {
      SelEdge e;
      e.a = i + 1;
      e.b = j + 1;
      e.all = {e.a, e.b};
      e.n1 = e.a;
      e.n2 = e.b;
      finish_edge(e, cols[i], cols[j], e.a, w, catalogue, trunc < 1, 1);
      tree.push_back(std::move(e));
    }
    trees.push_back(std::move(tree));
  }

  for (int level = 2; level <= d - 1; ++level) {
    const auto& prev = trees.back();
    const int m = static_cast<int>(prev.size());
    // candidate edges between previous-tree nodes sharing an endpoint
    struct Cand {
      int x1 = 0, x2 = 0;  // conditioned labels exported by each side
      const std::vector<double>* s1 = nullptr;
      const std::vector<double>* s2 = nullptr;
    };
    std::vector<Cand> cands(m * m);
    WeightedGraph g{m, std::vector<double>(m * m, -1.0)};
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const auto& e = prev[i];
        const auto& f = prev[j];
        const bool adjacent =
            e.n1 == f.n1 || e.n1 == f.n2 || e.n2 == f.n1 || e.n2 == f.n2;
        if (!adjacent) continue;
        Cand c;
        // the conditioned labels of the merged edge are the symmetric
        // difference of the two full variable sets
        for (int v : e.all)
          if (!std::binary_search(f.all.begin(), f.all.end(), v)) c.x1 = v;
        for (int v : f.all)
          if (!std::binary_search(e.all.begin(), e.all.end(), v)) c.x2 = v;
        if (c.x1 == 0 || c.x2 == 0) continue;
        c.s1 = (c.x1 == e.a) ? &e.pa : &e.pb;
        c.s2 = (c.x2 == f.a) ? &f.pa : &f.pb;
        double tau;
        try {
          tau = std::fabs(empirical_kendall_tau(*c.s1, *c.s2));
        } catch (const std::invalid_argument&) {
          tau = 0.0;  // degenerate pseudo-observations: treat as independent
        }
        g.w[i * m + j] = g.w[j * m + i] = tau;
        cands[i * m + j] = c;
      }

    std::vector<SelEdge> tree;
    for (const auto& [i, j] : mst(g)) {
      const auto& c = cands[i * m + j];
      SelEdge e;
      e.a = std::min(c.x1, c.x2);
      e.b = std::max(c.x1, c.x2);
      std::set_union(prev[i].all.begin(), prev[i].all.end(), prev[j].all.begin(),
                     prev[j].all.end(), std::back_inserter(e.all));
      e.n1 = i;
      e.n2 = j;
      finish_edge(e, *c.s1, *c.s2, c.x1, w, catalogue, level > trunc, level);
      tree.push_back(std::move(e));
    }
    trees.push_back(std::move(tree));
  }

  // encode the tree sequence as an R-vine matrix: each column takes the
  // unique remaining top-tree edge, then follows its diagonal label down
  std::vector<int> M(d * d, 0);
  std::vector<char> var_used(d + 1, 0);
  for (int c = 0; c <= d - 2; ++c) {
    const int top = d - 2 - c;
    SelEdge* top_edge = nullptr;
    for (auto& e : trees[top])
      if (e.alive) {
        if (top_edge) throw std::logic_error("select_structure: ambiguous top edge");
        top_edge = &e;
      }
    if (!top_edge) throw std::logic_error("select_structure: missing top edge");
    const int x = top_edge->b;  // the larger conditioned label goes on the diagonal
    M[c * d + c] = x;
    M[(c + 1) * d + c] = top_edge->a;
    var_used[x] = 1;
    top_edge->alive = false;
    for (int t = top - 1; t >= 0; --t) {
      SelEdge* hit = nullptr;
      for (auto& e : trees[t])
        if (e.alive && std::binary_search(e.all.begin(), e.all.end(), x)) {
          if (hit) throw std::logic_error("select_structure: ambiguous edge in tree " +
                                          std::to_string(t + 1));
          hit = &e;
        }
      if (!hit || (hit->a != x && hit->b != x))
        throw std::logic_error("select_structure: broken tree nesting");
      M[(d - 1 - t) * d + c] = (hit->a == x) ? hit->b : hit->a;
      hit->alive = false;
    }
  }
  for (int v = 1; v <= d; ++v)
    if (!var_used[v]) M[(d - 1) * d + (d - 1)] = v;

  RVineMatrix mat(d, std::move(M));
  const auto report = validate_matrix(mat);
  if (!report.valid)
    throw std::logic_error("select_structure: constructed matrix invalid: " +
                           report.message);

  // look up each matrix cell's edge by its conditioned pair, flipping the
  // rotation when the stored orientation disagrees with the column diagonal
  RVineSpec spec;
  spec.matrix = mat;
  spec.trunc_level = trunc;
  spec.families.assign(d * d, CopulaFamily::Independence);
  spec.params.assign(d * d, {});
  for (int c = 0; c < d - 1; ++c)
    for (int r = c + 1; r < d; ++r) {
      const int diag = mat.at(c, c), other = mat.at(r, c);
      const int lo = std::min(diag, other), hi = std::max(diag, other);
      const SelEdge* found = nullptr;
      for (const auto& tree : trees)
        for (const auto& e : tree)
          if (e.a == lo && e.b == hi) found = &e;
      if (!found) throw std::logic_error("select_structure: edge lookup failed");
      spec.families[r * d + c] =
          (found->first_arg == diag) ? found->family : swapped_family(found->family);
      spec.params[r * d + c] = found->params;
    }
  check_spec(spec);
  return spec;
}

RollingReport rolling_window(const CopulaData& data, int window,
                             const std::vector<RegimeRecipe>& candidates, int workers) {
  const int T = data.T, d = data.d;
  if (window < 2 || window > T)
    throw std::invalid_argument("rolling_window: window must be in [2, T]");
  if (candidates.empty()) throw std::invalid_argument("rolling_window: no candidates");
  const int nw = T - window + 1;
  const int nc = static_cast<int>(candidates.size());

  RollingReport rep;
  rep.window = window;
  rep.starts.resize(nw);
  std::iota(rep.starts.begin(), rep.starts.end(), 0);
  rep.loglik.assign(nc, std::vector<double>(nw, std::numeric_limits<double>::quiet_NaN()));
  rep.flagged.assign(nc, std::vector<std::uint8_t>(nw, 0));

  auto run_window = [&](int s) {
    std::vector<double> slice(data.u.begin() + static_cast<std::size_t>(s) * d,
                              data.u.begin() + static_cast<std::size_t>(s + window) * d);
    const CopulaData win{window, d, std::move(slice)};
    const std::vector<double> unit(window, 1.0);
    for (int k = 0; k < nc; ++k) {
      try {
        auto fit = fit_sequential(candidates[k].matrix, candidates[k].families, win, unit,
                                  candidates[k].trunc_level);
        const auto rows = log_density_rows(fit.spec, win);
        rep.loglik[k][s] = std::accumulate(rows.begin(), rows.end(), 0.0);
      } catch (const std::exception&) {
        rep.flagged[k][s] = 1;
      }
    }
  };

  workers = std::max(1, std::min(workers, nw));
  if (workers == 1) {
    for (int s = 0; s < nw; ++s) run_window(s);
  } else {
    std::vector<std::thread> pool;
    for (int wk = 0; wk < workers; ++wk)
      pool.emplace_back([&, wk] {
        for (int s = wk; s < nw; s += workers) run_window(s);
      });
    for (auto& th : pool) th.join();
  }
  return rep;
}

}  // namespace msrvine
