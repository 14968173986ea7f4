#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiosc/evaluator.hpp"

namespace equiosc {

enum class SolveStatus { converged, boundary_suspected, max_iter, jacobian_singular };
std::string_view to_string(SolveStatus status);

enum class StartKind { equidistant, user, coarse_grid };

struct SolveOptions {
  double tol_residual = 1e-10;
  int max_iter = 200;
  /// Backtracking factor and smallest accepted step of the damped Newton iteration.
  double damping_factor = 0.5;
  double min_step = 0x1p-30;
  /// Approximant levels visited before the original kernels (the final stage).
  std::vector<int> homotopy_levels{4, 16, 64, 256};
  ApproximantKind homotopy_kind = ApproximantKind::bump;
  StartKind start = StartKind::equidistant;
  std::optional<NodeSystem> start_nodes;
  std::uint64_t seed = 20240601;
  /// Random restarts used by the minimax fallback.
  int multistart = 6;
  std::size_t max_global_n = 6;
  EvalOptions eval;
};

struct TraceEntry {
  std::string stage;
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
  double objective = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  NodeSystem nodes;
  ArcProfile profile;
  /// ||Delta_sigma(nodes)||_inf
  double residual = 0.0;
  /// m_bar for minimax and equioscillation, m_under for maximin.
  double objective = 0.0;
  std::vector<TraceEntry> trace;
  Permutation simplex;
  /// Property notes: unmet hypotheses, failed certification, fallbacks taken.
  std::vector<std::string> flags;
  std::uint64_t seed = 0;
};

struct SimplexEntry {
  Permutation sigma;
  /// Simplex whose solve this entry reuses (equal kernel sequence).
  Permutation representative;
  double value = 0.0;
  SolveStatus status = SolveStatus::max_iter;
};

struct GlobalReport {
  SolveReport best;
  std::vector<SimplexEntry> table;
};

/// True when every kernel is strictly concave and either all satisfy the
/// derivative blow-up condition at 0 or all are C1.
bool minimax_hypotheses_hold(const Problem& p);

/// Finds w in S_sigma with Delta_sigma(w) = 0 (all arc maxima equal).
SolveReport solve_equioscillation(const Problem& p, const Permutation& sigma, const SolveOptions& opts = {});

/// M(S_sigma) = inf over S_sigma of m_bar.
SolveReport minimax(const Problem& p, const Permutation& sigma, const SolveOptions& opts = {});

/// M = min over sigma of M(S_sigma); exhaustive for n <= opts.max_global_n.
GlobalReport minimax_global(const Problem& p, const SolveOptions& opts = {});

/// m(S_sigma) = sup over S_sigma of m_under.
SolveReport maximin(const Problem& p, const Permutation& sigma, const SolveOptions& opts = {});

/// Direction a in [-1,1]^n, a != 0, with sum_j a_j mu_ij >= 0 for every active
/// arc i (mu_ij a supporting slope of K_j at z_i - y_j) and x.a = 0 for every
/// frozen row x. Moving y along a lowers every active m_i.
Eigen::VectorXd descent_direction(const Problem& p, const NodeSystem& y, const ArcProfile& prof,
                                  const std::vector<int>& active,
                                  const std::vector<Eigen::VectorXd>& frozen = {});

/// Moves y_j down by h / r_j and y_k up by h / r_k (r the kernel weights).
NodeSystem pull_apart(const Problem& p, const NodeSystem& y, std::size_t j, std::size_t k, double h);

/// Central finite-difference Jacobian of m_j (rows j = 0..n) w.r.t. y_1..y_n.
Eigen::MatrixXd jacobian_m_fd(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                              const EvalOptions& opts = {}, double h = 1e-7);

}  // namespace equiosc
