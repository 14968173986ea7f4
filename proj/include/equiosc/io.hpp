#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "equiosc/bojanov.hpp"
#include "equiosc/oracle.hpp"
#include "equiosc/solver.hpp"

namespace equiosc::io {

using Json = nlohmann::ordered_json;

/// Kernel spec from JSON, e.g. {"family":"weighted","weight":2.5,"base":{"family":"log_sine"}}.
/// Relative "csv" paths of table kernels resolve against base_dir.
Kernel kernel_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json kernel_to_json(const Kernel& k);

/// Two-column CSV (t, K(t)); a non-numeric first line is treated as a header.
Kernel load_table_csv(const std::filesystem::path& path);

/// Finite numbers as numbers, -inf as the string "-inf".
Json ext_real(double x);

Json to_json(const NodeSystem& y);
Json to_json(const Permutation& sigma);
Json to_json(const ArcProfile& prof);
Json to_json(const SolveReport& r, bool with_trace = true);
Json to_json(const GlobalReport& r);
Json to_json(const GtpResult& r);
Json to_json(const DoubledResult& r);
Json to_json(const ExtremalPolynomial& r);
Json to_json(const oracle::GridMinimaxResult& r);
Json to_json(const oracle::SandwichReport& r);
Json to_json(const oracle::MMatrixReport& r);
Json to_json(const oracle::ProbeReport& r);

/// Comma-separated list of reals ("1,2.5,3").
std::vector<double> parse_list(const std::string& text);

/// CSV with a header row; values printed with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace equiosc::io
