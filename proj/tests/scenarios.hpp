// the two four-dimensional simulation settings used throughout the heavier
// tests: a Gumbel C-vine regime and a Gaussian D-vine regime with a
// persistent two-state chain (a=0.95, b=0.9)
#pragma once

#include <cmath>
#include <vector>

#include "msrvine/ms_em.hpp"
#include "msrvine/rvine.hpp"

namespace scenarios {

inline msrvine::RVineMatrix cvine4() {
  return msrvine::RVineMatrix(4, {4, 0, 0, 0,  //
                                  3, 3, 0, 0,  //
                                  2, 2, 2, 0,  //
                                  1, 1, 1, 1});
}

inline msrvine::RVineMatrix dvine4() {
  return msrvine::RVineMatrix(4, {4, 0, 0, 0,  //
                                  1, 3, 0, 0,  //
                                  2, 1, 2, 0,  //
                                  3, 2, 1, 1});
}

// per-tree Kendall tau values, tree 1 first
struct RegimeTaus {
  double t1, t2, t3;
};

inline msrvine::RVineSpec gumbel_cvine(const RegimeTaus& tau) {
  using namespace msrvine;
  const int d = 4;
  std::vector<CopulaFamily> fams(d * d, CopulaFamily::Independence);
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) fams[r * d + c] = CopulaFamily::Gumbel;
  RVineSpec spec = make_spec(cvine4(), fams, d - 1);
  auto theta = [](double t) { return 1.0 / (1.0 - t); };
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) {
      const int tree = d - r;
      const double t = tree == 1 ? tau.t1 : (tree == 2 ? tau.t2 : tau.t3);
      spec.params[r * d + c] = {theta(t)};
    }
  return spec;
}

inline msrvine::RVineSpec gauss_dvine(const RegimeTaus& tau) {
  using namespace msrvine;
  const int d = 4;
  std::vector<CopulaFamily> fams(d * d, CopulaFamily::Independence);
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) fams[r * d + c] = CopulaFamily::Gaussian;
  RVineSpec spec = make_spec(dvine4(), fams, d - 1);
  auto rho = [](double t) { return std::sin(M_PI * t / 2.0); };
  for (int c = 0; c < d; ++c)
    for (int r = c + 1; r < d; ++r) {
      const int tree = d - r;
      const double t = tree == 1 ? tau.t1 : (tree == 2 ? tau.t2 : tau.t3);
      spec.params[r * d + c] = {rho(t)};
    }
  return spec;
}

// scenario 1: both regimes at tau (0.8, 0.6, 0.4); scenario 2 weakens the
// Gaussian regime to (0.3, 0.2, 0.1)
inline msrvine::MSRVineModel scenario_model(int scenario) {
  msrvine::MSRVineModel model;
  model.p = 2;
  model.regimes.push_back(gumbel_cvine({0.8, 0.6, 0.4}));
  model.regimes.push_back(scenario == 1 ? gauss_dvine({0.8, 0.6, 0.4})
                                        : gauss_dvine({0.3, 0.2, 0.1}));
  const double a = 0.95, b = 0.9;
  model.trans = msrvine::TransitionMatrix(2, {a, 1.0 - b, 1.0 - a, b});
  return model;
}

inline std::vector<msrvine::RegimeRecipe> scenario_recipes(const msrvine::MSRVineModel& m) {
  std::vector<msrvine::RegimeRecipe> recipes;
  for (const auto& spec : m.regimes)
    recipes.push_back({spec.matrix, spec.families, spec.trunc_level});
  return recipes;
}

}  // namespace scenarios
