#pragma once

// Brute-force reference computations. Nothing here calls arc_max or the
// solver: arc maxima are recomputed from kernel values only.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiosc/evaluator.hpp"
#include "equiosc/kernel.hpp"
#include "equiosc/torus.hpp"

namespace equiosc::oracle {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Max of F(y, .) over a uniform grid of `resolution` points, each of the best
/// discrete local maxima refined by golden-section search.
/// Requires resolution >= 10 (n + 1).
double grid_sup(const Problem& p, const NodeSystem& y, std::size_t resolution);

/// Per-arc maxima m_j (indexed by j) from sampling plus golden-section search.
std::vector<double> arc_maxima(const Problem& p, const NodeSystem& y, const Permutation& sigma);

struct GridMinimaxResult {
  double value = 0.0;
  NodeSystem argmin;
  /// Empirical accuracy of value: largest change of m_bar over the final
  /// pattern-search stencil, times n.
  double tolerance = 0.0;
  /// Best value on the coarse lattice before refinement.
  double coarse_value = 0.0;
  std::size_t lattice_points = 0;
};

/// Exhaustive sweep of the closed simplex lattice with `node_resolution`
/// steps per turn, followed by pattern-search refinement of the best cells.
/// n <= 3 only.
GridMinimaxResult grid_minimax(const Problem& p, const Permutation& sigma, std::size_t node_resolution);

struct SandwichViolation {
  /// "lower": m_under(x) > M.  "upper": m_bar(x) < M.
  std::string kind;
  NodeSystem nodes;
  double value = 0.0;
  double margin = 0.0;
};

struct SandwichReport {
  double reference = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = kDefaultSeed;
  std::vector<SandwichViolation> violations;
};

/// Checks m_under(x) <= M <= m_bar(x) on random interior samples of S_sigma
/// and on every point of `extra`.
SandwichReport check_sandwich(const Problem& p, const Permutation& sigma, double reference, std::size_t samples,
                              double tol = 1e-9, std::uint64_t seed = kDefaultSeed,
                              const std::vector<NodeSystem>& extra = {});

enum class Majorization { strict, weak, none };
std::string_view to_string(Majorization m);

/// Does x majorize y (m_j(x) >= m_j(y) for all j)? Componentwise with tolerance.
Majorization check_majorization(const std::vector<double>& mx, const std::vector<double>& my, double tol = 1e-12);
Majorization check_majorization(const ArcProfile& x, const ArcProfile& y, double tol = 1e-12);

struct MMatrixReport {
  bool ok = true;
  std::vector<std::string> diagnostics;
};

/// For J = jacobian_delta, checks that -J has positive diagonal, negative
/// off-diagonal entries and positive column sums.
MMatrixReport check_mmatrix(const Eigen::MatrixXd& j);
/// Same check with the columns put in simplex order (column k is node sigma(k)),
/// which is where the sign pattern lives when sigma is not the identity.
MMatrixReport check_mmatrix(const Eigen::MatrixXd& j, const Permutation& sigma);

struct ProbeRow {
  int level = 0;
  double deviation = 0.0;
  double bound = 0.0;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  bool within_bound = true;
  bool decreasing = true;
};

/// Sup-distance between the sorted m-vectors of the approximant problem and
/// the original one, per level. The bound column is (n + 1) / level.
ProbeReport convergence_probe(const Problem& p, ApproximantKind kind, const std::vector<int>& levels,
                              const NodeSystem& y, const Permutation& sigma);

struct IntervalSearchResult {
  std::vector<double> nodes;
  double norm = 0.0;
  double tolerance = 0.0;
};

/// sup over [a, b] of prod_j |x - x_j|^nu_j, by golden search on each piece.
double interval_sup(double a, double b, const std::vector<double>& nodes, const std::vector<double>& nu);

/// Minimizes interval_sup over a < x_1 < x_2 < b on a grid of the given step,
/// then refines by pattern search. Two exponents only.
IntervalSearchResult interval_grid_minimax(double a, double b, const std::vector<double>& nu, double step);

}  // namespace equiosc::oracle
