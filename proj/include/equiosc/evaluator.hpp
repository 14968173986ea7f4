#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "equiosc/ext_real.hpp"
#include "equiosc/kernel.hpp"
#include "equiosc/torus.hpp"

namespace equiosc {

/// Kernels K_0..K_n; K_0 sits at the anchor y_0 = 0.
struct Problem {
  std::vector<Kernel> kernels;

  explicit Problem(std::vector<Kernel> k);
  std::size_t n() const { return kernels.size() - 1; }
  /// True when every kernel is C1 on (0, 2pi).
  bool all_c1() const;
  bool all_c2() const;
};

enum class MaximizerMethod {
  /// Bisection on the sign of the one-sided derivatives of F(y, .).
  subgradient_bisection,
  /// Value-only golden-section search, then one Newton polish if C2.
  golden_section,
};

struct EvalOptions {
  double tol_z = 1e-12 * kTwoPi;
  MaximizerMethod method = MaximizerMethod::subgradient_bisection;
  double angle_tol = kAngleTol;
};

struct ArcMax {
  int index = 0;
  double start = 0.0;
  double end = 0.0;
  double z = 0.0;
  ExtReal m;
  bool z_on_boundary = false;
  /// The maximizing set is an interval (plateau); z is its midpoint.
  bool non_unique = false;
};

struct ArcProfile {
  Permutation sigma;
  std::vector<ArcMax> arcs;  // sigma order, k = 0..n
  ExtReal m_bar;
  ExtReal m_under;

  const ArcMax& by_index(int j) const;
  /// m_j indexed by arc index j = 0..n (-inf entries kept as -infinity).
  std::vector<double> m_by_index() const;
};

/// F(y, t) = K_0(t) + sum_j K_j(t - y_j).
ExtReal sum_translates(const Problem& p, const NodeSystem& y, double t);
/// sum_j K_j(t - y_full[j]) with no anchoring.
ExtReal sum_translates_full(const Problem& p, std::span<const double> y_full, double t);
/// One-sided t-derivative of F(y, t).
double sum_translates_deriv(const Problem& p, const NodeSystem& y, double t, Side side);

ArcMax arc_max(const Problem& p, const NodeSystem& y, const Arc& arc, const EvalOptions& opts = {});
ArcMax arc_max(const Problem& p, const NodeSystem& y, const Permutation& sigma, int j,
               const EvalOptions& opts = {});

ArcProfile profile(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                   const EvalOptions& opts = {});

/// sup_t F(y, t) = max_j m_j(y); independent of the compatible sigma chosen.
ExtReal sup_F(const Problem& p, const NodeSystem& y, const EvalOptions& opts = {});

/// Entry (j, r-1) = dm_j/dy_r = -K_r'(z_j - y_r). Needs C1 kernels, an interior
/// node system and maximizers strictly inside their arcs.
Eigen::MatrixXd jacobian_m(const Problem& p, const NodeSystem& y, const ArcProfile& prof);
Eigen::MatrixXd jacobian_m(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                           const EvalOptions& opts = {});

/// (m_sigma(1) - m_sigma(0), ..., m_sigma(n) - m_sigma(n-1)); a -inf maximum
/// makes the affected components +infinity.
Eigen::VectorXd delta(const ArcProfile& prof);
Eigen::VectorXd delta(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                      const EvalOptions& opts = {});

/// Row k-1 = row sigma(k) of jacobian_m minus row sigma(k-1).
Eigen::MatrixXd jacobian_delta(const Eigen::MatrixXd& jm, const Permutation& sigma);
Eigen::MatrixXd jacobian_delta(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                               const EvalOptions& opts = {});

}  // namespace equiosc
