#pragma once

#include <string>
#include <vector>

#include "equiosc/solver.hpp"

namespace equiosc {

/// Generalized trigonometric polynomial prod_j |sin((t - w_j)/2)|^{r_j}.
struct GtpResult {
  SolveReport report;
  std::vector<double> exponents;
  /// w_0 = 0, w_1 < ... < w_n.
  std::vector<double> nodes;
  /// Maximizer of |T| on each arc [w_j, w_{j+1}].
  std::vector<double> peaks;
  /// sup |T| = exp(M).
  double norm = 0.0;
  bool interlaced = false;
};

/// Minimizes sup |T| over 0 = w_0 < w_1 < ... < w_n < 2pi.
GtpResult solve_gtp(const std::vector<double>& exponents, const SolveOptions& opts = {});

struct DoubledResult {
  SolveReport report;
  /// (r_n, ..., r_1, r_1, ..., r_n)
  std::vector<double> weights;
  /// w_1 < ... < w_2n, rotated so that w_1 + w_2n = 2pi.
  std::vector<double> nodes;
  /// Arc maximizers in the same frame; peaks[k] lies between nodes[k] and
  /// nodes[k+1], the last one wrapping across 0.
  std::vector<double> peaks;
  /// max_k |w_k + w_{2n+1-k} - 2pi|
  double symmetry_residual = 0.0;
  /// Same test for the peaks, which pair up around pi and 0.
  double peak_symmetry_residual = 0.0;
  /// M = sup_t log |T(t)|.
  double value = 0.0;
  std::vector<std::string> flags;
};

/// The 2n-node problem with mirrored weights. The first node carries the
/// anchored kernel; the solution is rotated afterwards.
DoubledResult solve_doubled_symmetric(const std::vector<double>& exponents, const SolveOptions& opts = {});

struct BojanovProblem {
  double a = -1.0;
  double b = 1.0;
  std::vector<double> exponents;
};

/// Validates a < b, non-empty positive exponents.
void validate(const BojanovProblem& q);

/// L(x) = ((b - a)/2) x + (b + a)/2.
double interval_map(double x, double a, double b);

/// x_j = L(cos t_{n+1-j}) for a symmetric 2n-node system t_1 < ... < t_2n.
std::vector<double> transfer_to_interval(const std::vector<double>& t_nodes, double a, double b);

/// prod_j |x - x_j|^nu_j on [a, b] with least sup norm.
struct ExtremalPolynomial {
  double a = -1.0;
  double b = 1.0;
  std::vector<double> exponents;
  /// a < x_1 < ... < x_n < b
  std::vector<double> nodes;
  /// a = s_0 < s_1 < ... < s_n = b, interlacing with the nodes.
  std::vector<double> alternation;
  double norm = 0.0;
  /// max_j | |P(s_j)| - norm | / norm
  double equioscillation_residual = 0.0;
  bool interlaced = false;
  SolveStatus status = SolveStatus::max_iter;
  std::vector<std::string> flags;
};

ExtremalPolynomial solve_bojanov(const BojanovProblem& q, const SolveOptions& opts = {});

/// prod_j |x - x_j|^nu_j.
double eval_gap(double x, const ExtremalPolynomial& poly);
double eval_gap(double x, const std::vector<double>& nodes, const std::vector<double>& exponents);

/// |P(L(cos t)) ((b - a)/2)^(-sum nu) 2^(-sum nu) - T(t)| with P built from the
/// transferred nodes and T the doubled trigonometric polynomial.
double transference_identity_check(double t, const BojanovProblem& q, const std::vector<double>& t_nodes);

}  // namespace equiosc
