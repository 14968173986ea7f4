#include "equiosc/bojanov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "equiosc/errors.hpp"

namespace equiosc {

namespace {

void check_exponents(const std::vector<double>& r) {
  if (r.empty()) throw ValidationError("at least one exponent is required");
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("exponents must be positive and finite");
  }
}

Problem weighted_log_sine(const std::vector<double>& weights) {
  std::vector<Kernel> ks;
  ks.reserve(weights.size());
  for (double w : weights) ks.push_back(Kernel::weighted(Kernel::log_sine(), w));
  return Problem(std::move(ks));
}

double symmetry_residual(const std::vector<double>& t) {
  double r = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) r = std::max(r, std::abs(t[k] + t[t.size() - 1 - k] - kTwoPi));
  return r;
}

}  // namespace

GtpResult solve_gtp(const std::vector<double>& exponents, const SolveOptions& opts) {
  check_exponents(exponents);
  const Problem p = weighted_log_sine(exponents);
  GtpResult out;
  out.exponents = exponents;
  out.report = minimax(p, Permutation::identity(p.n()), opts);
  out.nodes.push_back(0.0);
  for (double y : out.report.nodes.values()) out.nodes.push_back(y);
  for (const auto& a : out.report.profile.arcs) out.peaks.push_back(a.z);
  out.norm = std::exp(out.report.objective);
  out.interlaced = true;
  for (std::size_t j = 0; j < out.peaks.size(); ++j) {
    const double hi = j + 1 < out.nodes.size() ? out.nodes[j + 1] : kTwoPi;
    if (!(out.nodes[j] < out.peaks[j] && out.peaks[j] < hi)) out.interlaced = false;
  }
  if (!out.interlaced) out.report.flags.push_back("nodes and peaks do not interlace");
  return out;
}

DoubledResult solve_doubled_symmetric(const std::vector<double>& exponents, const SolveOptions& opts) {
  check_exponents(exponents);
  const std::size_t n = exponents.size();
  DoubledResult out;
  out.weights.assign(exponents.rbegin(), exponents.rend());
  out.weights.insert(out.weights.end(), exponents.begin(), exponents.end());
  const Problem p = weighted_log_sine(out.weights);
  out.report = minimax(p, Permutation::identity(p.n()), opts);
  out.value = out.report.objective;

  std::vector<double> u{0.0};
  for (double y : out.report.nodes.values()) u.push_back(y);
  const double shift = 0.5 * (kTwoPi - u.back());
  for (double v : u) out.nodes.push_back(v + shift);
  for (const auto& a : out.report.profile.arcs) out.peaks.push_back(a.z + shift);

  out.symmetry_residual = symmetry_residual(out.nodes);
  // Peaks 0..2n-2 pair up around pi; the last one sits at 2pi.
  double pr = std::abs(out.peaks.back() - kTwoPi);
  for (std::size_t k = 0; k + 1 < 2 * n; ++k) {
    pr = std::max(pr, std::abs(out.peaks[k] + out.peaks[2 * n - 2 - k] - kTwoPi));
  }
  out.peak_symmetry_residual = pr;
  if (out.symmetry_residual > 1e-8) out.flags.push_back("doubled solution is not symmetric");
  if (out.peak_symmetry_residual > 1e-8) out.flags.push_back("peaks of the doubled solution are not symmetric");
  return out;
}

void validate(const BojanovProblem& q) {
  if (!(q.a < q.b) || !std::isfinite(q.a) || !std::isfinite(q.b)) throw ValidationError("interval needs a < b");
  check_exponents(q.exponents);
}

double interval_map(double x, double a, double b) { return 0.5 * (b - a) * x + 0.5 * (b + a); }

std::vector<double> transfer_to_interval(const std::vector<double>& t_nodes, double a, double b) {
  if (t_nodes.empty() || t_nodes.size() % 2 != 0) throw ValidationError("need an even, non-empty node list");
  if (!std::is_sorted(t_nodes.begin(), t_nodes.end())) throw ValidationError("torus nodes must be increasing");
  if (symmetry_residual(t_nodes) > 1e-8) throw ValidationError("torus nodes are not symmetric about pi");
  const std::size_t n = t_nodes.size() / 2;
  std::vector<double> x(n);
  for (std::size_t j = 1; j <= n; ++j) x[j - 1] = interval_map(std::cos(t_nodes[n - j]), a, b);
  return x;
}

double eval_gap(double x, const std::vector<double>& nodes, const std::vector<double>& exponents) {
  if (nodes.size() != exponents.size()) throw ValidationError("one exponent per node required");
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double d = std::abs(x - nodes[j]);
    if (d == 0.0) return 0.0;
    acc += exponents[j] * std::log(d);
  }
  return std::exp(acc);
}

double eval_gap(double x, const ExtremalPolynomial& poly) { return eval_gap(x, poly.nodes, poly.exponents); }

ExtremalPolynomial solve_bojanov(const BojanovProblem& q, const SolveOptions& opts) {
  validate(q);
  const std::size_t n = q.exponents.size();
  const DoubledResult d = solve_doubled_symmetric(q.exponents, opts);
  ExtremalPolynomial out;
  out.a = q.a;
  out.b = q.b;
  out.exponents = q.exponents;
  out.status = d.report.status;
  out.flags = d.report.flags;
  out.flags.insert(out.flags.end(), d.flags.begin(), d.flags.end());
  if (d.symmetry_residual > 1e-8) return out;
  out.nodes = transfer_to_interval(d.nodes, q.a, q.b);

  // The 2n peaks fold onto n + 1 points: a and b once, the others twice.
  std::vector<double> v;
  for (double z : d.peaks) v.push_back(interval_map(std::cos(z), q.a, q.b));
  std::sort(v.begin(), v.end());
  out.alternation.push_back(q.a);
  for (std::size_t j = 1; j < n; ++j) out.alternation.push_back(0.5 * (v[2 * j - 1] + v[2 * j]));
  out.alternation.push_back(q.b);
  const double scale = q.b - q.a;
  if (std::abs(v.front() - q.a) > 1e-6 * scale || std::abs(v.back() - q.b) > 1e-6 * scale) {
    out.flags.push_back("extreme peaks do not map to the interval ends");
  }

  const double total = std::accumulate(q.exponents.begin(), q.exponents.end(), 0.0);
  out.norm = std::pow(q.b - q.a, total) * std::exp(d.value);
  for (double s : out.alternation) {
    out.equioscillation_residual = std::max(out.equioscillation_residual, std::abs(eval_gap(s, out) - out.norm) / out.norm);
  }
  out.interlaced = true;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(out.alternation[j] < out.nodes[j] && out.nodes[j] < out.alternation[j + 1])) out.interlaced = false;
  }
  if (!out.interlaced) out.flags.push_back("nodes and alternation points do not interlace");
  if (out.equioscillation_residual > 1e-7) out.flags.push_back("alternation values differ from the norm");
  return out;
}

double transference_identity_check(double t, const BojanovProblem& q, const std::vector<double>& t_nodes) {
  validate(q);
  const std::size_t n = q.exponents.size();
  if (t_nodes.size() != 2 * n) throw ValidationError("need 2n torus nodes");
  const std::vector<double> x = transfer_to_interval(t_nodes, q.a, q.b);
  const double total = std::accumulate(q.exponents.begin(), q.exponents.end(), 0.0);
  const double p = eval_gap(interval_map(std::cos(t), q.a, q.b), x, q.exponents);
  const double lhs = p * std::pow(0.5 * (q.b - q.a), -total) * std::pow(2.0, -total);
  double trig = 1.0;
  for (std::size_t k = 0; k < 2 * n; ++k) {
    // Weight of t_k is nu_j with j = n - k for k < n and k - n + 1 otherwise (1-based j).
    const double w = k < n ? q.exponents[n - 1 - k] : q.exponents[k - n];
    trig *= std::pow(std::abs(std::sin(0.5 * (t - t_nodes[k]))), w);
  }
  return std::abs(lhs - trig);
}

}  // namespace equiosc
