#include "equiosc/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "equiosc/errors.hpp"

namespace equiosc::io {

namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ValidationError(std::string("kernel field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used != cell.size()) throw std::invalid_argument(cell);
    out.push_back(v);
  }
  return out;
}

}  // namespace

Kernel kernel_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ValidationError("kernel spec needs a string field 'family'");
  }
  const std::string family = j.at("family").get<std::string>();
  if (family == "log_sine") return Kernel::log_sine();
  if (family == "riesz") return Kernel::riesz(number(j, "p"));
  if (family == "tent") return Kernel::tent();
  if (family == "parabola") return Kernel::parabola();
  if (family == "table") {
    if (j.contains("csv")) {
      std::filesystem::path path = j.at("csv").get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      return load_table_csv(path);
    }
    if (!j.contains("t") || !j.contains("v")) throw ValidationError("table kernel needs 't' and 'v' arrays or 'csv'");
    return Kernel::table(j.at("t").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
  }
  if (family == "weighted") {
    if (!j.contains("base")) throw ValidationError("weighted kernel needs 'base'");
    return Kernel::weighted(kernel_from_json(j.at("base"), base_dir), number(j, "weight"));
  }
  if (family == "sum") {
    if (!j.contains("terms") || !j.at("terms").is_array()) throw ValidationError("sum kernel needs a 'terms' array");
    std::vector<Kernel> terms;
    for (const auto& t : j.at("terms")) terms.push_back(kernel_from_json(t, base_dir));
    return Kernel::sum(std::move(terms));
  }
  if (family == "smoothed") {
    if (!j.contains("base")) throw ValidationError("smoothed kernel needs 'base'");
    const double level = number(j, "level");
    if (level != std::floor(level)) throw ValidationError("smoothing level must be an integer");
    const std::string kind = j.value("kind", std::string("bump"));
    return Kernel::smoothed(kernel_from_json(j.at("base"), base_dir), static_cast<int>(level),
                            approximant_kind_from_string(kind));
  }
  throw ValidationError("unknown kernel family '" + family + "'");
}

Json kernel_to_json(const Kernel& k) {
  return std::visit(
      [](const auto& f) -> Json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LogSine>) {
          return {{"family", "log_sine"}};
        } else if constexpr (std::is_same_v<T, Riesz>) {
          return {{"family", "riesz"}, {"p", f.p}};
        } else if constexpr (std::is_same_v<T, Tent>) {
          return {{"family", "tent"}};
        } else if constexpr (std::is_same_v<T, Parabola>) {
          return {{"family", "parabola"}};
        } else if constexpr (std::is_same_v<T, Table>) {
          return {{"family", "table"}, {"t", f.t}, {"v", f.v}};
        } else if constexpr (std::is_same_v<T, Weighted>) {
          return {{"family", "weighted"}, {"weight", f.weight}, {"base", kernel_to_json(f.base)}};
        } else if constexpr (std::is_same_v<T, Sum>) {
          Json terms = Json::array();
          for (const auto& t : f.terms) terms.push_back(kernel_to_json(t));
          return {{"family", "sum"}, {"terms", terms}};
        } else {
          return {{"family", "smoothed"},
                  {"base", kernel_to_json(f.base)},
                  {"level", f.level},
                  {"kind", std::string(to_string(f.kind))}};
        }
      },
      k.spec().family);
}

Kernel load_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open table file " + path.string());
  std::vector<double> t;
  std::vector<double> v;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    try {
      row = parse_row(line);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;
      }
      throw ValidationError("malformed table row: " + line);
    }
    first = false;
    if (row.size() != 2) throw ValidationError("table rows need two columns: " + line);
    t.push_back(row[0]);
    v.push_back(row[1]);
  }
  return Kernel::table(std::move(t), std::move(v));
}

Json ext_real(double x) {
  if (x == -std::numeric_limits<double>::infinity()) return "-inf";
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json to_json(const NodeSystem& y) { return Json(std::vector<double>(y.values().begin(), y.values().end())); }

Json to_json(const Permutation& sigma) { return Json(sigma.values()); }

Json to_json(const ArcProfile& prof) {
  Json arcs = Json::array();
  for (const auto& a : prof.arcs) {
    arcs.push_back({{"index", a.index},
                    {"start", a.start},
                    {"end", a.end},
                    {"z", a.z},
                    {"m", ext_real(a.m.value())},
                    {"z_on_boundary", a.z_on_boundary},
                    {"non_unique", a.non_unique}});
  }
  return {{"sigma", to_json(prof.sigma)},
          {"m_bar", ext_real(prof.m_bar.value())},
          {"m_under", ext_real(prof.m_under.value())},
          {"arcs", arcs}};
}

Json to_json(const SolveReport& r, bool with_trace) {
  Json out{{"status", std::string(to_string(r.status))},
           {"simplex", to_json(r.simplex)},
           {"nodes", to_json(r.nodes)},
           {"objective", ext_real(r.objective)},
           {"residual", ext_real(r.residual)},
           {"profile", to_json(r.profile)},
           {"flags", r.flags},
           {"seed", r.seed}};
  if (with_trace) {
    Json trace = Json::array();
    for (const auto& t : r.trace) {
      trace.push_back({{"stage", t.stage},
                       {"iteration", t.iteration},
                       {"residual", ext_real(t.residual)},
                       {"step", t.step},
                       {"objective", ext_real(t.objective)}});
    }
    out["trace"] = trace;
  }
  return out;
}

Json to_json(const GlobalReport& r) {
  Json table = Json::array();
  for (const auto& e : r.table) {
    table.push_back({{"sigma", to_json(e.sigma)},
                     {"representative", to_json(e.representative)},
                     {"value", ext_real(e.value)},
                     {"status", std::string(to_string(e.status))}});
  }
  return {{"best", to_json(r.best)}, {"table", table}};
}

Json to_json(const GtpResult& r) {
  return {{"exponents", r.exponents}, {"nodes", r.nodes}, {"peaks", r.peaks},
          {"norm", r.norm},           {"interlaced", r.interlaced}, {"report", to_json(r.report, false)}};
}

Json to_json(const DoubledResult& r) {
  return {{"weights", r.weights},
          {"nodes", r.nodes},
          {"peaks", r.peaks},
          {"value", r.value},
          {"symmetry_residual", r.symmetry_residual},
          {"peak_symmetry_residual", r.peak_symmetry_residual},
          {"flags", r.flags},
          {"report", to_json(r.report, false)}};
}

Json to_json(const ExtremalPolynomial& r) {
  return {{"interval", {r.a, r.b}},
          {"exponents", r.exponents},
          {"nodes", r.nodes},
          {"alternation", r.alternation},
          {"norm", r.norm},
          {"equioscillation_residual", r.equioscillation_residual},
          {"interlaced", r.interlaced},
          {"status", std::string(to_string(r.status))},
          {"flags", r.flags}};
}

Json to_json(const oracle::GridMinimaxResult& r) {
  return {{"value", r.value},
          {"tolerance", r.tolerance},
          {"coarse_value", r.coarse_value},
          {"argmin", to_json(r.argmin)},
          {"lattice_points", r.lattice_points}};
}

Json to_json(const oracle::SandwichReport& r) {
  Json v = Json::array();
  for (const auto& w : r.violations) {
    v.push_back({{"kind", w.kind}, {"nodes", to_json(w.nodes)}, {"value", ext_real(w.value)}, {"margin", w.margin}});
  }
  return {{"reference", r.reference}, {"samples", r.samples}, {"seed", r.seed}, {"violations", v}};
}

Json to_json(const oracle::MMatrixReport& r) { return {{"ok", r.ok}, {"diagnostics", r.diagnostics}}; }

Json to_json(const oracle::ProbeReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"level", row.level}, {"deviation", row.deviation}, {"bound", row.bound}});
  return {{"rows", rows}, {"within_bound", r.within_bound}, {"decreasing", r.decreasing}};
}

std::vector<double> parse_list(const std::string& text) {
  try {
    return parse_row(text);
  } catch (const std::exception&) {
    throw ValidationError("expected a comma-separated list of numbers, got '" + text + "'");
  }
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  out << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace equiosc::io
