#include "msrvine/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace msrvine {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

ordered_json vine_to_json(const RVineSpec& spec) {
  const int d = spec.d();
  ordered_json j;
  j["d"] = d;
  auto& mat = j["matrix"] = ordered_json::array();
  for (int r = 0; r < d; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < d; ++c) row.push_back(spec.matrix.at(r, c));
    mat.push_back(std::move(row));
  }
  auto& fam = j["families"] = ordered_json::array();
  for (int r = 0; r < d; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < d; ++c) row.push_back(family_tag(spec.families[r * d + c]));
    fam.push_back(std::move(row));
  }
  auto& par = j["params"] = ordered_json::array();
  for (int r = 0; r < d; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < d; ++c) row.push_back(spec.params[r * d + c]);
    par.push_back(std::move(row));
  }
  j["trunc"] = spec.trunc_level;
  return j;
}

RVineSpec vine_from_json(const json& j) {
  try {
    const int d = j.at("d").get<int>();
    if (d < 1 || d > 1000) throw DataError("model: dimension out of range");
    RVineSpec spec;
    std::vector<int> m(d * d, 0);
    const auto& mat = j.at("matrix");
    if (static_cast<int>(mat.size()) != d) throw DataError("model: matrix row count");
    for (int r = 0; r < d; ++r) {
      if (static_cast<int>(mat[r].size()) != d) throw DataError("model: matrix col count");
      for (int c = 0; c < d; ++c) m[r * d + c] = mat[r][c].get<int>();
    }
    spec.matrix = RVineMatrix(d, std::move(m));
    spec.families.assign(d * d, CopulaFamily::Independence);
    const auto& fam = j.at("families");
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        const auto tag = fam.at(r).at(c).get<std::string>();
        const auto f = family_from_tag(tag);
        if (!f) throw DataError("model: unknown family tag '" + tag + "'");
        spec.families[r * d + c] = *f;
      }
    spec.params.assign(d * d, {});
    const auto& par = j.at("params");
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        spec.params[r * d + c] = par.at(r).at(c).get<std::vector<double>>();
    spec.trunc_level = j.at("trunc").get<int>();
    check_spec(spec);
    return spec;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

ordered_json model_to_json(const MSRVineModel& model) {
  ordered_json j;
  j["p"] = model.p;
  auto& trans = j["trans"] = ordered_json::array();
  for (int i = 0; i < model.p; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < model.p; ++k) row.push_back(model.trans.at(i, k));
    trans.push_back(std::move(row));
  }
  auto& regimes = j["regimes"] = ordered_json::array();
  for (const auto& spec : model.regimes) regimes.push_back(vine_to_json(spec));
  return j;
}

MSRVineModel model_from_json(const json& j) {
  MSRVineModel model;
  if (!j.contains("regimes")) {
    // plain vine file: one regime, trivial chain
    model.p = 1;
    model.regimes.push_back(vine_from_json(j));
    model.trans = TransitionMatrix(1, {1.0});
    return model;
  }
  try {
    model.p = j.at("p").get<int>();
    if (model.p < 1 || model.p > 64) throw DataError("model: regime count out of range");
    for (const auto& r : j.at("regimes")) model.regimes.push_back(vine_from_json(r));
    const auto& trans = j.at("trans");
    std::vector<double> P(model.p * model.p, 0.0);
    if (static_cast<int>(trans.size()) != model.p) throw DataError("model: trans row count");
    for (int i = 0; i < model.p; ++i)
      for (int k = 0; k < model.p; ++k) P[i * model.p + k] = trans.at(i).at(k).get<double>();
    model.trans = TransitionMatrix(model.p, std::move(P));
    check_model(model);
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void write_model_file(const std::string& path, const MSRVineModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << model_to_json(model).dump(2) << "\n";
}

MSRVineModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return model_from_json(j);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  table.cols = static_cast<int>(table.header.size());
  if (table.cols == 0) throw DataError(path + ": empty header row");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int ncell = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw DataError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      table.values.push_back(v);
      ++ncell;
    }
    if (ncell != table.cols)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.cols) + " columns, got " + std::to_string(ncell));
    ++table.rows;
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
    out << (c ? "," : "") << table.header[c];
  out << "\n";
  for (int r = 0; r < table.rows; ++r) {
    for (int c = 0; c < table.cols; ++c)
      out << (c ? "," : "") << format_double(table.at(r, c));
    out << "\n";
  }
}

CopulaData copula_data_from_csv(const CsvTable& table) {
  try {
    return make_copula_data(table.rows, table.cols, table.values);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("data: ") + e.what());
  }
}

CsvTable copula_data_to_csv(const CopulaData& data) {
  CsvTable table;
  for (int j = 1; j <= data.d; ++j) table.header.push_back("u" + std::to_string(j));
  table.rows = data.T;
  table.cols = data.d;
  table.values = data.u;
  return table;
}

}  // namespace msrvine
