#include "equiosc/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "equiosc/bojanov.hpp"
#include "equiosc/errors.hpp"
#include "equiosc/io.hpp"
#include "equiosc/oracle.hpp"
#include "equiosc/solver.hpp"

namespace equiosc::cli {

namespace {

using io::Json;

struct Args {
  std::string config;
  std::string sigma;
  bool all_sigma = false;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  std::string emit_samples;
  bool degrees = false;
  bool no_timestamp = false;
  std::string interval = "-1,1";
  std::string exponents;
  std::string check;
  std::optional<std::size_t> resolution;
  std::string nodes;
  std::string at;
  std::string levels = "4,16,64,256";
  std::string kind = "sqrt_cusp";
  std::size_t samples = 100;
  bool trace = false;
};

struct Config {
  Json doc = Json::object();
  std::filesystem::path base_dir;
};

double to_radians(double v, bool degrees) { return degrees ? v * kPi / 180.0 : v; }

Config load_config(const Args& a, std::istream& in) {
  Config c;
  std::string text;
  if (a.config.empty() || a.config == "-") {
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    std::ifstream f(a.config);
    if (!f) throw ValidationError("cannot open config " + a.config);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
    c.base_dir = std::filesystem::path(a.config).parent_path();
  }
  try {
    c.doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!c.doc.is_object()) throw ValidationError("config must be a JSON object");
  return c;
}

Problem problem_from(const Config& c) {
  const Json& d = c.doc;
  std::vector<Kernel> ks;
  if (d.contains("kernels")) {
    if (!d.at("kernels").is_array()) throw ValidationError("'kernels' must be an array");
    for (const auto& k : d.at("kernels")) ks.push_back(io::kernel_from_json(k, c.base_dir));
  } else if (d.contains("kernel")) {
    if (!d.contains("n") || !d.at("n").is_number_integer() || d.at("n").get<int>() < 0) {
      throw ValidationError("a replicated 'kernel' needs a non-negative integer 'n'");
    }
    const Kernel k = io::kernel_from_json(d.at("kernel"), c.base_dir);
    ks.assign(static_cast<std::size_t>(d.at("n").get<int>()) + 1, k);
  } else {
    throw ValidationError("config needs 'kernels' or 'kernel' with 'n'");
  }
  if (ks.empty()) throw ValidationError("at least one kernel is required");
  return Problem(std::move(ks));
}

std::vector<double> number_array(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string("'") + what + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ValidationError(std::string("'") + what + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::optional<NodeSystem> nodes_from(const Args& a, const Config& c, std::size_t n) {
  std::vector<double> raw;
  if (!a.nodes.empty()) {
    raw = io::parse_list(a.nodes);
  } else if (c.doc.contains("nodes")) {
    raw = number_array(c.doc.at("nodes"), "nodes");
  } else {
    return std::nullopt;
  }
  if (raw.size() != n) {
    throw ValidationError("expected " + std::to_string(n) + " nodes, got " + std::to_string(raw.size()));
  }
  for (double& v : raw) v = to_radians(v, a.degrees);
  return NodeSystem(std::move(raw));
}

NodeSystem require_nodes(const Args& a, const Config& c, std::size_t n) {
  auto y = nodes_from(a, c, n);
  if (!y) throw ValidationError("nodes are required (--nodes or 'nodes' in the config)");
  return *y;
}

std::optional<Permutation> sigma_from(const Args& a, const Config& c, std::size_t n) {
  std::optional<Permutation> s;
  if (!a.sigma.empty()) {
    s = Permutation::parse(a.sigma);
  } else if (c.doc.contains("sigma")) {
    const Json& j = c.doc.at("sigma");
    if (j.is_string()) {
      s = Permutation::parse(j.get<std::string>());
    } else if (j.is_array()) {
      s = Permutation(j.get<std::vector<int>>());
    } else {
      throw ValidationError("'sigma' must be a string or an array");
    }
  }
  if (s && s->n() != n) throw ValidationError("sigma has the wrong length for this problem");
  return s;
}

Permutation sigma_or_locate(const Args& a, const Config& c, const NodeSystem& y) {
  if (auto s = sigma_from(a, c, y.n())) return *s;
  const SimplexLocation loc = locate(y);
  if (loc.permutations.empty()) throw ValidationError("cannot locate the node system");
  return loc.permutations.front();
}

Permutation sigma_or_identity(const Args& a, const Config& c, std::size_t n) {
  if (auto s = sigma_from(a, c, n)) return *s;
  return Permutation::identity(n);
}

SolveOptions options_from(const Args& a, const Config& c, std::size_t n) {
  SolveOptions o;
  if (c.doc.contains("options")) {
    const Json& j = c.doc.at("options");
    if (!j.is_object()) throw ValidationError("'options' must be an object");
    o.tol_residual = j.value("tol", o.tol_residual);
    o.max_iter = j.value("max_iter", o.max_iter);
    o.seed = j.value("seed", o.seed);
    o.multistart = j.value("multistart", o.multistart);
    o.max_global_n = j.value("max_global_n", o.max_global_n);
    o.damping_factor = j.value("damping_factor", o.damping_factor);
    o.min_step = j.value("min_step", o.min_step);
    if (j.contains("homotopy_levels")) o.homotopy_levels = j.at("homotopy_levels").get<std::vector<int>>();
    if (j.contains("homotopy_kind")) {
      o.homotopy_kind = approximant_kind_from_string(j.at("homotopy_kind").get<std::string>());
    }
    if (j.contains("start")) {
      const std::string s = j.at("start").get<std::string>();
      if (s == "equidistant") {
        o.start = StartKind::equidistant;
      } else if (s == "coarse_grid") {
        o.start = StartKind::coarse_grid;
      } else if (s == "user") {
        o.start = StartKind::user;
      } else {
        throw ValidationError("unknown start '" + s + "'");
      }
    }
    if (j.contains("maximizer")) {
      const std::string m = j.at("maximizer").get<std::string>();
      if (m == "bisection") {
        o.eval.method = MaximizerMethod::subgradient_bisection;
      } else if (m == "golden") {
        o.eval.method = MaximizerMethod::golden_section;
      } else {
        throw ValidationError("unknown maximizer '" + m + "'");
      }
    }
  }
  if (a.tol) o.tol_residual = *a.tol;
  if (a.max_iter) o.max_iter = *a.max_iter;
  if (a.seed) o.seed = *a.seed;
  if (!(o.tol_residual > 0.0)) throw ValidationError("tolerance must be positive");
  if (o.max_iter <= 0) throw ValidationError("max-iter must be positive");
  if (auto y = nodes_from(a, c, n)) {
    o.start_nodes = *y;
    if (!c.doc.contains("options") || !c.doc.at("options").contains("start")) o.start = StartKind::user;
  }
  if (o.start == StartKind::user && !o.start_nodes) throw ValidationError("start 'user' needs nodes");
  return o;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(std::ostream& out, const std::string& command, const Json& body, const Args& a) {
  Json doc{{"schema", 1}, {"command", command}};
  for (const auto& [k, v] : body.items()) doc[k] = v;
  if (!a.no_timestamp) doc["timestamp"] = timestamp();
  out << doc.dump(2) << '\n';
}

bool property_flag(const std::string& f) {
  return f == "non_minimal_equioscillation" || f == "uncertified_maximum";
}

int solve_exit(const SolveReport& r) {
  if (r.status != SolveStatus::converged) return kExitFlagged;
  for (const auto& f : r.flags) {
    if (property_flag(f)) return kExitFlagged;
  }
  return kExitOk;
}

int cmd_eval(const Args& a, const Config& c, std::ostream& out) {
  const Problem p = problem_from(c);
  const NodeSystem y = require_nodes(a, c, p.n());
  std::vector<double> ts;
  if (!a.at.empty()) {
    ts = io::parse_list(a.at);
  } else if (c.doc.contains("t")) {
    ts = number_array(c.doc.at("t"), "t");
  }
  Json values = Json::array();
  for (double t : ts) {
    const double r = to_radians(t, a.degrees);
    values.push_back({{"t", r}, {"F", io::ext_real(sum_translates(p, y, r).value())}});
  }
  emit(out, "eval", {{"nodes", io::to_json(y)}, {"values", values}, {"sup", io::ext_real(sup_F(p, y).value())}}, a);
  return kExitOk;
}

int cmd_profile(const Args& a, const Config& c, std::ostream& out) {
  const Problem p = problem_from(c);
  const NodeSystem y = require_nodes(a, c, p.n());
  const Permutation sigma = sigma_or_locate(a, c, y);
  const ArcProfile prof = profile(p, y, sigma);
  Json d = Json::array();
  const Eigen::VectorXd dv = delta(prof);
  for (Eigen::Index i = 0; i < dv.size(); ++i) d.push_back(io::ext_real(dv(i)));
  emit(out, "profile", {{"nodes", io::to_json(y)}, {"profile", io::to_json(prof)}, {"delta", d}}, a);
  return kExitOk;
}

int cmd_solve(const std::string& name, const Args& a, const Config& c, std::ostream& out) {
  const Problem p = problem_from(c);
  const SolveOptions o = options_from(a, c, p.n());
  if (name == "minimax" && a.all_sigma) {
    const GlobalReport g = minimax_global(p, o);
    emit(out, name, {{"global", io::to_json(g)}}, a);
    return solve_exit(g.best);
  }
  const Permutation sigma = sigma_or_identity(a, c, p.n());
  SolveReport r;
  if (name == "equioscillate") {
    r = solve_equioscillation(p, sigma, o);
  } else if (name == "minimax") {
    r = minimax(p, sigma, o);
  } else {
    r = maximin(p, sigma, o);
  }
  emit(out, name, {{"report", io::to_json(r, a.trace)}}, a);
  return solve_exit(r);
}

std::pair<double, double> parse_interval(const std::string& text) {
  const std::vector<double> v = io::parse_list(text);
  if (v.size() != 2) throw ValidationError("--interval needs two numbers a,b");
  return {v[0], v[1]};
}

int cmd_bojanov(const Args& a, std::ostream& out) {
  if (a.exponents.empty()) throw ValidationError("--exponents is required");
  BojanovProblem q;
  std::tie(q.a, q.b) = parse_interval(a.interval);
  q.exponents = io::parse_list(a.exponents);
  validate(q);
  SolveOptions o;
  if (a.tol) o.tol_residual = *a.tol;
  if (a.max_iter) o.max_iter = *a.max_iter;
  if (a.seed) o.seed = *a.seed;
  const ExtremalPolynomial poly = solve_bojanov(q, o);
  if (!a.emit_samples.empty()) {
    std::ofstream f(a.emit_samples);
    if (!f) throw ValidationError("cannot write " + a.emit_samples);
    const std::size_t r = a.resolution.value_or(1001);
    if (r < 2) throw ValidationError("resolution must be at least 2");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r; ++i) {
      const double x = q.a + (q.b - q.a) * static_cast<double>(i) / static_cast<double>(r - 1);
      rows.push_back({x, poly.nodes.empty() ? 0.0 : eval_gap(x, poly)});
    }
    io::write_csv(f, {"x", "abs_P"}, rows);
  }
  emit(out, "bojanov", {{"polynomial", io::to_json(poly)}}, a);
  return poly.status == SolveStatus::converged && poly.flags.empty() ? kExitOk : kExitFlagged;
}

int cmd_gtp(const Args& a, std::ostream& out) {
  if (a.exponents.empty()) throw ValidationError("--exponents is required");
  const std::vector<double> r = io::parse_list(a.exponents);
  if (r.size() < 2) throw ValidationError("--exponents needs r0 and at least one more exponent");
  SolveOptions o;
  if (a.tol) o.tol_residual = *a.tol;
  if (a.max_iter) o.max_iter = *a.max_iter;
  if (a.seed) o.seed = *a.seed;
  const GtpResult g = solve_gtp(r, o);
  emit(out, "gtp", {{"gtp", io::to_json(g)}}, a);
  return g.interlaced ? solve_exit(g.report) : kExitFlagged;
}

Eigen::MatrixXd delta_jacobian(const Problem& p, const NodeSystem& y, const Permutation& sigma) {
  try {
    return jacobian_delta(p, y, sigma);
  } catch (const JacobianUnavailable&) {
    return jacobian_delta(jacobian_m_fd(p, y, sigma), sigma);
  }
}

int cmd_verify(const Args& a, const Config& c, std::ostream& out) {
  const Problem p = problem_from(c);
  if (a.check == "sandwich") {
    const Permutation sigma = sigma_or_identity(a, c, p.n());
    double reference = 0.0;
    Json extra_info = Json::object();
    if (c.doc.contains("reference")) {
      reference = c.doc.at("reference").get<double>();
    } else {
      const SolveReport r = minimax(p, sigma, options_from(a, c, p.n()));
      reference = r.objective;
      extra_info = {{"status", std::string(to_string(r.status))}, {"nodes", io::to_json(r.nodes)}};
    }
    std::vector<NodeSystem> extra;
    if (auto y = nodes_from(a, c, p.n())) extra.push_back(*y);
    const auto rep = oracle::check_sandwich(p, sigma, reference, a.samples, 1e-9, a.seed.value_or(oracle::kDefaultSeed),
                                            extra);
    emit(out, "verify", {{"check", "sandwich"}, {"minimax", extra_info}, {"result", io::to_json(rep)}}, a);
    return rep.violations.empty() ? kExitOk : kExitFlagged;
  }
  if (a.check == "mmatrix") {
    const Permutation sigma = sigma_or_identity(a, c, p.n());
    NodeSystem y;
    if (auto given = nodes_from(a, c, p.n())) {
      y = *given;
    } else {
      SolveOptions o = options_from(a, c, p.n());
      y = solve_equioscillation(p, sigma, o).nodes;
    }
    const Eigen::MatrixXd jd = delta_jacobian(p, y, sigma);
    const auto rep = oracle::check_mmatrix(jd, sigma);
    emit(out, "verify", {{"check", "mmatrix"}, {"nodes", io::to_json(y)}, {"result", io::to_json(rep)}}, a);
    return rep.ok ? kExitOk : kExitFlagged;
  }
  if (a.check == "convergence") {
    const NodeSystem y = require_nodes(a, c, p.n());
    const Permutation sigma = sigma_or_locate(a, c, y);
    std::vector<int> levels;
    for (double v : io::parse_list(a.levels)) {
      if (v < 1 || v != std::floor(v)) throw ValidationError("levels must be positive integers");
      levels.push_back(static_cast<int>(v));
    }
    const auto rep = oracle::convergence_probe(p, approximant_kind_from_string(a.kind), levels, y, sigma);
    emit(out, "verify", {{"check", "convergence"}, {"kind", a.kind}, {"result", io::to_json(rep)}}, a);
    return rep.within_bound && rep.decreasing ? kExitOk : kExitFlagged;
  }
  if (a.check == "grid-minimax") {
    const Permutation sigma = sigma_or_identity(a, c, p.n());
    const auto rep = oracle::grid_minimax(p, sigma, a.resolution.value_or(120));
    emit(out, "verify", {{"check", "grid-minimax"}, {"sigma", io::to_json(sigma)}, {"result", io::to_json(rep)}}, a);
    return kExitOk;
  }
  throw ValidationError("--check must be one of sandwich, mmatrix, convergence, grid-minimax");
}

int cmd_sample(const Args& a, const Config& c, std::ostream& out) {
  const Problem p = problem_from(c);
  const NodeSystem y = require_nodes(a, c, p.n());
  const std::size_t r = a.resolution.value_or(1000);
  if (r == 0) throw ValidationError("resolution must be positive");
  std::vector<std::vector<double>> rows;
  rows.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(r);
    rows.push_back({t, sum_translates(p, y, t).value()});
  }
  if (a.emit_samples.empty()) {
    io::write_csv(out, {"t", "F"}, rows);
    return kExitOk;
  }
  std::ofstream f(a.emit_samples);
  if (!f) throw ValidationError("cannot write " + a.emit_samples);
  io::write_csv(f, {"t", "F"}, rows);
  emit(out, "sample", {{"file", a.emit_samples}, {"rows", r}, {"nodes", io::to_json(y)}}, a);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equioscillation and minimax solver for sums of translates on the torus", "equiosc"};
  app.require_subcommand(1);
  Args a;

  auto common = [&a](CLI::App* s) {
    s->add_option("--config", a.config, "JSON problem config; '-' or omitted reads stdin");
    s->add_option("--nodes", a.nodes, "Node system y_1,...,y_n (overrides the config)");
    s->add_flag("--degrees", a.degrees, "Angles on input are in degrees");
    s->add_flag("--no-timestamp", a.no_timestamp, "Omit the timestamp field");
  };
  auto solving = [&a](CLI::App* s) {
    s->add_option("--sigma", a.sigma, "Permutation literal such as 2,1,3");
    s->add_option("--tol", a.tol, "Residual tolerance");
    s->add_option("--max-iter", a.max_iter, "Iteration cap per stage");
    s->add_option("--seed", a.seed, "Random seed");
  };

  auto* eval = app.add_subcommand("eval", "Evaluate F(y, t)");
  common(eval);
  eval->add_option("--at", a.at, "Points t at which to evaluate");
  auto* prof = app.add_subcommand("profile", "Arc maxima, maximizers and Delta");
  common(prof);
  prof->add_option("--sigma", a.sigma, "Permutation literal such as 2,1,3");
  auto* equi = app.add_subcommand("equioscillate", "Solve for an equioscillation point");
  auto* mini = app.add_subcommand("minimax", "Minimize the largest arc maximum");
  auto* maxi = app.add_subcommand("maximin", "Maximize the smallest arc maximum");
  for (auto* s : {equi, mini, maxi}) {
    common(s);
    solving(s);
    s->add_flag("--trace", a.trace, "Include the iteration trace");
  }
  mini->add_flag("--all-sigma", a.all_sigma, "Minimize over every simplex");
  auto* boj = app.add_subcommand("bojanov", "Extremal polynomial with prescribed root multiplicities");
  boj->add_option("--interval", a.interval, "Interval a,b")->capture_default_str();
  boj->add_option("--exponents", a.exponents, "Exponents nu_1,...,nu_n")->required();
  boj->add_option("--emit-samples", a.emit_samples, "Write (x, |P(x)|) pairs to this CSV file");
  boj->add_option("--resolution", a.resolution, "Number of emitted samples");
  auto* gtp = app.add_subcommand("gtp", "Generalized trigonometric polynomial of least norm");
  gtp->add_option("--exponents", a.exponents, "Exponents r_0,...,r_n")->required();
  for (auto* s : {boj, gtp}) {
    s->add_option("--tol", a.tol, "Residual tolerance");
    s->add_option("--max-iter", a.max_iter, "Iteration cap per stage");
    s->add_option("--seed", a.seed, "Random seed");
    s->add_flag("--no-timestamp", a.no_timestamp, "Omit the timestamp field");
  }
  auto* ver = app.add_subcommand("verify", "Run a verification oracle");
  common(ver);
  solving(ver);
  ver->add_option("--check", a.check, "sandwich, mmatrix, convergence or grid-minimax")
      ->required()
      ->check(CLI::IsMember({"sandwich", "mmatrix", "convergence", "grid-minimax"}));
  ver->add_option("--resolution", a.resolution, "Node resolution of grid-minimax");
  ver->add_option("--samples", a.samples, "Random samples for the sandwich check")->capture_default_str();
  ver->add_option("--levels", a.levels, "Approximant levels for the convergence probe")->capture_default_str();
  ver->add_option("--kind", a.kind, "Approximant kind for the convergence probe")->capture_default_str();
  auto* smp = app.add_subcommand("sample", "Tabulate F(y, .) on a uniform grid as CSV");
  common(smp);
  smp->add_option("--resolution", a.resolution, "Number of rows");
  smp->add_option("--emit-samples", a.emit_samples, "Write the CSV here and print a JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "equiosc: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*boj) return cmd_bojanov(a, out);
    if (*gtp) return cmd_gtp(a, out);
    const Config c = load_config(a, in);
    if (*eval) return cmd_eval(a, c, out);
    if (*prof) return cmd_profile(a, c, out);
    if (*equi) return cmd_solve("equioscillate", a, c, out);
    if (*mini) return cmd_solve("minimax", a, c, out);
    if (*maxi) return cmd_solve("maximin", a, c, out);
    if (*ver) return cmd_verify(a, c, out);
    if (*smp) return cmd_sample(a, c, out);
  } catch (const std::exception& e) {
    err << "equiosc: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace equiosc::cli
