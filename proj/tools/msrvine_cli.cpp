// command-line front end: simulate / select / fit-em / fit-bayes / rolling /
// dic / report.  Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msrvine/bayes_mcmc.hpp"
#include "msrvine/model_io.hpp"
#include "msrvine/ms_em.hpp"
#include "msrvine/structure_select.hpp"

namespace fs = std::filesystem;
using namespace msrvine;
using nlohmann::ordered_json;

namespace {

std::vector<CopulaFamily> parse_catalogue(const std::string& s) {
  std::vector<CopulaFamily> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    const auto f = family_from_tag(cur);
    if (!f) throw CLI::ValidationError("--catalogue", "unknown family tag '" + cur + "'");
    out.push_back(*f);
  }
  if (out.empty()) throw CLI::ValidationError("--catalogue", "empty catalogue");
  return out;
}

std::vector<int> parse_ident(const std::string& s) {
  if (s == "all") return {};
  std::vector<int> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    try {
      out.push_back(std::stoi(cur));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ident-stat", "expected 'all' or tree numbers");
    }
  }
  return out;
}

void ensure_dir(const std::string& out) { fs::create_directories(out); }

CopulaData load_data(const std::string& path) {
  return copula_data_from_csv(read_csv(path));
}

std::vector<RegimeRecipe> recipes_from_model(const MSRVineModel& m, int p) {
  std::vector<RegimeRecipe> recipes;
  for (const auto& spec : m.regimes)
    recipes.push_back({spec.matrix, spec.families, spec.trunc_level});
  if (static_cast<int>(recipes.size()) == p) return recipes;
  if (recipes.size() == 1) {
    recipes.resize(p, recipes.front());
    return recipes;
  }
  throw DataError("model has " + std::to_string(recipes.size()) +
                  " regimes but --regimes is " + std::to_string(p));
}

struct EdgeRef {
  int tree, r, c;
  CopulaFamily family;
};

std::vector<EdgeRef> model_edges(const RVineSpec& spec) {
  std::vector<EdgeRef> edges;
  const int d = spec.d();
  for (int tree = 1; tree <= spec.trunc_level; ++tree) {
    const int r = d - tree;
    for (int c = 0; c < r; ++c)
      if (spec.family_at(r, c) != CopulaFamily::Independence)
        edges.push_back({tree, r, c, spec.family_at(r, c)});
  }
  return edges;
}

ordered_json param_summary(const std::vector<double>& chain) {
  const int n = static_cast<int>(chain.size());
  double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
  double var = 0.0;
  for (double x : chain) var += (x - mean) * (x - mean);
  var /= std::max(n - 1, 1);
  ordered_json j;
  j["mean"] = mean;
  j["sd"] = std::sqrt(var);
  const auto ci = credible_intervals(chain, 0.90);
  j["ci90"] = {ci.symmetric.lo, ci.symmetric.hi};
  j["hpd90"] = {ci.hpd.lo, ci.hpd.hi};
  if (n >= 10) {
    bool degen = false;
    j["ess"] = effective_sample_size(chain, &degen);
    if (degen) j["degenerate"] = true;
  } else {
    j["ess"] = n;
  }
  return j;
}

// ---- commands ----

struct SimulateOpts {
  std::string model, out;
  std::uint64_t seed = 0;
  int rows = 800;
};

int cmd_simulate(const SimulateOpts& o) {
  const auto model = read_model_file(o.model);
  const auto sim = simulate_ms(model, o.rows, o.seed);
  ensure_dir(o.out);
  write_csv(o.out + "/data.csv", copula_data_to_csv(sim.data));
  CsvTable states;
  states.header = {"t", "state"};
  states.rows = o.rows;
  states.cols = 2;
  for (int t = 0; t < o.rows; ++t) {
    states.values.push_back(t + 1);
    states.values.push_back(sim.states[t]);
  }
  write_csv(o.out + "/states.csv", states);
  write_model_file(o.out + "/model.json", model);
  std::cout << "simulated " << o.rows << " rows, d=" << model.d() << ", p=" << model.p
            << "\n";
  return 0;
}

struct SelectOpts {
  std::string data, out, catalogue = "N,t,G,SG,G90,G270";
  int trunc = -1;
};

int cmd_select(const SelectOpts& o) {
  const auto data = load_data(o.data);
  const auto spec = select_structure(data, parse_catalogue(o.catalogue), o.trunc);
  ensure_dir(o.out);
  std::ofstream out(o.out + "/model.json");
  if (!out) throw DataError("cannot write " + o.out + "/model.json");
  out << vine_to_json(spec).dump(2) << "\n";
  std::cout << "selected structure for d=" << spec.d() << "\n";
  return 0;
}

struct FitEmOpts {
  std::string data, out, model, catalogue = "N,t,G,SG,G90,G270";
  int regimes = 2, trunc = -1, iters = 100;
  double tol = 1e-6;
};

int cmd_fit_em(const FitEmOpts& o) {
  const auto data = load_data(o.data);
  std::vector<RegimeRecipe> recipes;
  if (!o.model.empty()) {
    const auto m = read_model_file(o.model);
    if (m.d() != data.d) throw DataError("model dimension does not match data");
    recipes = recipes_from_model(m, o.regimes);
  } else {
    const auto spec = select_structure(data, parse_catalogue(o.catalogue), o.trunc);
    recipes.assign(o.regimes, {spec.matrix, spec.families, spec.trunc_level});
  }
  auto model0 = initialize(recipes, data);
  auto fit = em_fit(model0, data, o.tol, o.iters);

  ensure_dir(o.out);
  write_model_file(o.out + "/model.json", fit.model);
  const int p = fit.model.p, T = data.T;
  CsvTable sm;
  sm.header = {"t"};
  for (int k = 1; k <= p; ++k) sm.header.push_back("prob_regime_" + std::to_string(k));
  sm.rows = T;
  sm.cols = p + 1;
  for (int t = 0; t < T; ++t) {
    sm.values.push_back(t + 1);
    for (int k = 0; k < p; ++k) sm.values.push_back(fit.trace.smoothed[t * p + k]);
  }
  write_csv(o.out + "/smoothed.csv", sm);
  CsvTable trace;
  trace.header = {"iter", "loglik"};
  trace.rows = fit.trace.iterations;
  trace.cols = 2;
  for (int i = 0; i < fit.trace.iterations; ++i) {
    trace.values.push_back(i + 1);
    trace.values.push_back(fit.trace.logliks[i]);
  }
  write_csv(o.out + "/trace.csv", trace);
  std::cout << (fit.trace.converged ? "converged" : "stopped") << " after "
            << fit.trace.iterations << " iterations, loglik "
            << format_double(ms_log_likelihood(fit.model, data)) << "\n";
  if (!fit.trace.converged)
    std::cerr << "warning: EM did not reach the convergence tolerance\n";
  return 0;
}

struct FitBayesOpts {
  std::string data, model, out, ident = "all";
  std::uint64_t seed = 0;
  int iters = 20000, burnin = 1000, thin = 5, keep = 1000;
};

int cmd_fit_bayes(const FitBayesOpts& o) {
  const auto data = load_data(o.data);
  const auto model = read_model_file(o.model);
  if (model.d() != data.d) throw DataError("model dimension does not match data");
  if (o.iters <= o.burnin) throw DataError("iterations must exceed burnin");

  // proposal scales from one weighted-fit pass at the model's smooths
  const auto se = em_step(model, data).se;

  ChainConfig cfg;
  cfg.iterations = o.iters;
  cfg.burnin = o.burnin;
  cfg.thin = o.thin;
  cfg.seed = o.seed;
  cfg.ident_trees = parse_ident(o.ident);
  auto run = gibbs_run(model, data, cfg, PriorSpec::noninformative(model.p), se);

  // even sub-sample down to the retention target
  std::vector<PosteriorDraw> kept;
  const int n = static_cast<int>(run.draws.size());
  const int m = std::min(o.keep, n);
  for (int i = 0; i < m; ++i)
    kept.push_back(run.draws[static_cast<std::size_t>(i) * n / m]);

  ensure_dir(o.out);
  const int p = model.p;

  for (int k = 0; k < p; ++k) {
    const auto edges = model_edges(model.regimes[k]);
    CsvTable chain;
    chain.header = {"iteration"};
    for (const auto& e : edges) {
      chain.header.push_back("tau_" + std::to_string(e.r + 1) + "_" + std::to_string(e.c + 1));
      if (e.family == CopulaFamily::StudentT)
        chain.header.push_back("nu_" + std::to_string(e.r + 1) + "_" + std::to_string(e.c + 1));
    }
    chain.rows = m;
    chain.cols = static_cast<int>(chain.header.size());
    const int d = model.d();
    for (int i = 0; i < m; ++i) {
      chain.values.push_back(i + 1);
      for (const auto& e : edges) {
        const auto& params = kept[i].regime_params[k][e.r * d + e.c];
        chain.values.push_back(param_to_tau(PairCopula(e.family, params)));
        if (e.family == CopulaFamily::StudentT) chain.values.push_back(params[1]);
      }
    }
    write_csv(o.out + "/regime" + std::to_string(k + 1) + "_chain.csv", chain);
  }
  {
    CsvTable chain;
    chain.header = {"iteration"};
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        chain.header.push_back("t_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    chain.rows = m;
    chain.cols = 1 + p * p;
    for (int i = 0; i < m; ++i) {
      chain.values.push_back(i + 1);
      for (double v : kept[i].trans.P) chain.values.push_back(v);
    }
    write_csv(o.out + "/trans_chain.csv", chain);
  }
  {
    CsvTable chain;
    chain.header = {"iteration"};
    for (int t = 1; t <= data.T; ++t) chain.header.push_back("s" + std::to_string(t));
    chain.rows = m;
    chain.cols = 1 + data.T;
    for (int i = 0; i < m; ++i) {
      chain.values.push_back(i + 1);
      for (int s : kept[i].states) chain.values.push_back(s);
    }
    write_csv(o.out + "/states_chain.csv", chain);
  }

  ordered_json summary;
  summary["kept"] = m;
  summary["acceptance_rate"] = run.acceptance_rate;
  const int d = model.d();
  auto& regimes = summary["regimes"] = ordered_json::array();
  for (int k = 0; k < p; ++k) {
    ordered_json rj;
    auto& ej = rj["edges"] = ordered_json::array();
    for (const auto& e : model_edges(model.regimes[k])) {
      ordered_json one;
      one["tree"] = e.tree;
      one["row"] = e.r + 1;
      one["col"] = e.c + 1;
      one["family"] = family_tag(e.family);
      const int np = param_count(e.family);
      auto& pj = one["params"] = ordered_json::array();
      for (int q = 0; q < np; ++q) {
        std::vector<double> chain(m);
        for (int i = 0; i < m; ++i) chain[i] = kept[i].regime_params[k][e.r * d + e.c][q];
        pj.push_back(param_summary(chain));
      }
      std::vector<double> taus(m);
      for (int i = 0; i < m; ++i)
        taus[i] = param_to_tau(PairCopula(e.family, kept[i].regime_params[k][e.r * d + e.c]));
      one["tau"] = param_summary(taus);
      ej.push_back(std::move(one));
    }
    regimes.push_back(std::move(rj));
  }
  auto& tj = summary["trans"] = ordered_json::array();
  for (int i = 0; i < p; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < p; ++j) {
      std::vector<double> chain(m);
      for (int q = 0; q < m; ++q) chain[q] = kept[q].trans.at(i, j);
      row.push_back(param_summary(chain));
    }
    tj.push_back(std::move(row));
  }
  const auto dr = dic(kept, model, data);
  summary["dic"] = dr.dic;
  summary["p_d"] = dr.p_d;
  summary["mean_deviance"] = dr.mean_deviance;
  if (dr.projected) summary["dic_projected"] = true;

  std::ofstream out(o.out + "/summary.json");
  if (!out) throw DataError("cannot write " + o.out + "/summary.json");
  out << summary.dump(2) << "\n";
  std::cout << "kept " << m << " draws, acceptance "
            << format_double(run.acceptance_rate) << ", DIC " << format_double(dr.dic)
            << "\n";
  return 0;
}

struct RollingOpts {
  std::string data, out;
  std::vector<std::string> models;
  int window = 100, workers = 1;
};

int cmd_rolling(const RollingOpts& o) {
  const auto data = load_data(o.data);
  std::vector<RegimeRecipe> candidates;
  for (const auto& path : o.models) {
    const auto m = read_model_file(path);
    if (m.d() != data.d) throw DataError(path + ": dimension does not match data");
    const auto& spec = m.regimes.front();
    candidates.push_back({spec.matrix, spec.families, spec.trunc_level});
  }
  const auto rep = rolling_window(data, o.window, candidates, o.workers);

  ensure_dir(o.out);
  const int nw = static_cast<int>(rep.starts.size());
  const int nc = static_cast<int>(candidates.size());
  CsvTable table;
  table.header = {"window_start", "candidate_id", "loglik", "flagged"};
  table.rows = nw * nc;
  table.cols = 4;
  for (int s = 0; s < nw; ++s)
    for (int k = 0; k < nc; ++k) {
      table.values.push_back(rep.starts[s] + 1);
      table.values.push_back(k + 1);
      table.values.push_back(rep.loglik[k][s]);
      table.values.push_back(rep.flagged[k][s]);
    }
  write_csv(o.out + "/rolling.csv", table);
  std::cout << nw << " windows x " << nc << " candidates\n";
  return 0;
}

struct DicOpts {
  std::vector<std::string> summaries;
  std::string out;
};

int cmd_dic(const DicOpts& o) {
  struct Row {
    std::string name;
    double dic, p_d, mean_dev;
  };
  std::vector<Row> rows;
  for (const auto& path : o.summaries) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    nlohmann::json j;
    try {
      in >> j;
      rows.push_back({path, j.at("dic").get<double>(), j.at("p_d").get<double>(),
                      j.at("mean_deviance").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.dic < b.dic; });
  ensure_dir(o.out);
  std::ofstream out(o.out + "/dic.csv");
  if (!out) throw DataError("cannot write " + o.out + "/dic.csv");
  out << "model,dic,p_d,mean_deviance\n";
  for (const auto& r : rows)
    out << r.name << "," << format_double(r.dic) << "," << format_double(r.p_d) << ","
        << format_double(r.mean_dev) << "\n";
  for (const auto& r : rows) std::cout << r.name << " DIC " << format_double(r.dic) << "\n";
  return 0;
}

struct ReportOpts {
  std::string data, out;
  int window = 7;
};

// display smoothing for probability plots: centered moving average
int cmd_report(const ReportOpts& o) {
  const auto table = read_csv(o.data);
  if (o.window < 1) throw DataError("report: window must be positive");
  CsvTable sm = table;
  const int half = o.window / 2;
  for (int c = 1; c < table.cols; ++c)
    for (int r = 0; r < table.rows; ++r) {
      const int lo = std::max(0, r - half), hi = std::min(table.rows - 1, r + half);
      double acc = 0.0;
      for (int t = lo; t <= hi; ++t) acc += table.at(t, c);
      sm.values[r * sm.cols + c] = acc / (hi - lo + 1);
    }
  ensure_dir(o.out);
  write_csv(o.out + "/display.csv", sm);
  std::cout << "smoothed " << table.rows << " rows with window " << o.window << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-switching R-vine copulas"};
  app.require_subcommand(1);

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "draw data from a model");
  sim->add_option("--model", so.model, "model JSON")->required();
  sim->add_option("--out", so.out, "output directory")->required();
  sim->add_option("--seed", so.seed, "RNG seed")->required();
  sim->add_option("--rows", so.rows, "number of observations");

  SelectOpts seo;
  auto* sel = app.add_subcommand("select", "data-driven structure selection");
  sel->add_option("--data", seo.data, "data CSV")->required();
  sel->add_option("--out", seo.out, "output directory")->required();
  sel->add_option("--catalogue", seo.catalogue, "comma-separated family tags");
  sel->add_option("--trunc", seo.trunc, "truncation level (-1 = none)");

  FitEmOpts eo;
  auto* em = app.add_subcommand("fit-em", "stepwise EM estimation");
  em->add_option("--data", eo.data, "data CSV")->required();
  em->add_option("--out", eo.out, "output directory")->required();
  em->add_option("--model", eo.model, "structure recipe model JSON");
  em->add_option("--regimes", eo.regimes, "number of regimes");
  em->add_option("--trunc", eo.trunc, "truncation level for selection");
  em->add_option("--catalogue", eo.catalogue, "family tags for selection");
  em->add_option("--iters", eo.iters, "max EM iterations");
  em->add_option("--tol", eo.tol, "relative loglik tolerance");

  FitBayesOpts bo;
  auto* bay = app.add_subcommand("fit-bayes", "Metropolis-within-Gibbs sampling");
  bay->add_option("--data", bo.data, "data CSV")->required();
  bay->add_option("--model", bo.model, "starting model JSON")->required();
  bay->add_option("--out", bo.out, "output directory")->required();
  bay->add_option("--seed", bo.seed, "RNG seed")->required();
  bay->add_option("--iters", bo.iters, "Gibbs iterations");
  bay->add_option("--burnin", bo.burnin, "burn-in iterations");
  bay->add_option("--thin", bo.thin, "thinning interval");
  bay->add_option("--keep", bo.keep, "retention target after thinning");
  bay->add_option("--ident-stat", bo.ident, "'all' or comma-separated trees");

  RollingOpts ro;
  auto* rol = app.add_subcommand("rolling", "rolling-window candidate comparison");
  rol->add_option("--data", ro.data, "data CSV")->required();
  rol->add_option("--model", ro.models, "candidate model JSONs")->required();
  rol->add_option("--out", ro.out, "output directory")->required();
  rol->add_option("--window", ro.window, "window length");
  rol->add_option("--workers", ro.workers, "worker threads");

  DicOpts dopt;
  auto* dc = app.add_subcommand("dic", "rank fitted models by DIC");
  dc->add_option("--model", dopt.summaries, "fit-bayes summary JSONs")->required();
  dc->add_option("--out", dopt.out, "output directory")->required();

  ReportOpts rpo;
  auto* rep = app.add_subcommand("report", "display smoothing for probability CSVs");
  rep->add_option("--data", rpo.data, "smoothed-probability CSV")->required();
  rep->add_option("--out", rpo.out, "output directory")->required();
  rep->add_option("--window", rpo.window, "moving-average window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(so);
    if (*sel) return cmd_select(seo);
    if (*em) return cmd_fit_em(eo);
    if (*bay) return cmd_fit_bayes(bo);
    if (*rol) return cmd_rolling(ro);
    if (*dc) return cmd_dic(dopt);
    if (*rep) return cmd_report(rpo);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
