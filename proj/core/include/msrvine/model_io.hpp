#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msrvine/ms_em.hpp"
#include "msrvine/rvine.hpp"

namespace msrvine {

// malformed input files (distinct from numerical failures for exit codes)
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// single-vine object: {"d", "matrix", "families", "params", "trunc"},
// matrices row-major, families as string tags
nlohmann::ordered_json vine_to_json(const RVineSpec& spec);
RVineSpec vine_from_json(const nlohmann::json& j);

// switching model adds "p", "trans" (column-stochastic) and a "regimes"
// array; a plain vine object loads as a one-regime model
nlohmann::ordered_json model_to_json(const MSRVineModel& model);
MSRVineModel model_from_json(const nlohmann::json& j);

void write_model_file(const std::string& path, const MSRVineModel& model);
MSRVineModel read_model_file(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  int rows = 0, cols = 0;
  std::vector<double> values;  // row-major

  double at(int r, int c) const { return values[r * cols + c]; }
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// convenience: CSV of copula data with u1..ud header / validation on read
CopulaData copula_data_from_csv(const CsvTable& table);
CsvTable copula_data_to_csv(const CopulaData& data);

std::string format_double(double x);  // shortest round-trip decimal

}  // namespace msrvine
