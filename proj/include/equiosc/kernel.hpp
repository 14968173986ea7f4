#pragma once

#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "equiosc/ext_real.hpp"

namespace equiosc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Side { left, right };

/// Closed-form surrogate families used to regularize a kernel.
enum class ApproximantKind { bump, log_cusp, sqrt_cusp };

std::string_view to_string(ApproximantKind kind);
ApproximantKind approximant_kind_from_string(std::string_view name);

/// Flags describing the singularity and smoothness of a kernel.
///
/// cond_inf: K(0) = -inf. cond_inf_prime_minus: D_-K(0) = -inf (left
/// derivative at 2pi). cond_inf_prime_plus: D_+K(0) = +inf.
/// cond_inf_prime: either one-sided blow-up. c1/c2 refer to (0, 2pi).
struct KernelClass {
  bool finite_at_zero = false;
  bool cond_inf = false;
  bool cond_inf_prime_minus = false;
  bool cond_inf_prime_plus = false;
  bool cond_inf_prime = false;
  bool c1 = false;
  bool c2 = false;
  bool strictly_concave = false;
  bool even_symmetric = false;
};

struct KernelSpec;

/// An immutable concave kernel function on the torus R / 2piZ.
///
/// Kernels are cheap to copy (shared immutable representation) and safe to
/// evaluate from several threads at once.
class Kernel {
 public:
  static Kernel log_sine();
  /// -(2 sin(t/2))^(-p), the concave form of -|e^{it} - 1|^{-p}.
  static Kernel riesz(double p);
  /// pi - |t - pi| on [0, 2pi].
  static Kernel tent();
  /// t (2pi - t) on [0, 2pi].
  static Kernel parabola();
  /// Piecewise linear through (t_i, v_i); t must run from 0 to 2pi with v(0) = v(2pi).
  static Kernel table(std::vector<double> t, std::vector<double> v);
  static Kernel weighted(Kernel base, double weight);
  static Kernel sum(std::vector<Kernel> terms);
  static Kernel smoothed(Kernel base, int level, ApproximantKind kind);

  /// K(t) with t reduced mod 2pi. At t = 0 this is the common endpoint limit.
  ExtReal eval(double t) const;
  /// One-sided derivative. At t = 0, Side::right is D_+K(0) and Side::left is
  /// the left derivative at 2pi. Values may be +-inf only at t = 0.
  double deriv(double t, Side side) const;
  /// K''(t) for t in (0, 2pi). Throws CapabilityError for non-C2 families.
  double second_deriv(double t) const;
  KernelClass classify() const;

  const KernelSpec& spec() const { return *spec_; }
  /// Canonical textual form; equal strings mean equal kernels.
  std::string canonical() const;
  /// Weight r when the kernel is weighted(base, r), otherwise 1.
  double weight() const;

 private:
  explicit Kernel(std::shared_ptr<const KernelSpec> spec) : spec_(std::move(spec)) {}
  std::shared_ptr<const KernelSpec> spec_;
};

struct LogSine {};
struct Riesz {
  double p;
};
struct Tent {};
struct Parabola {};
struct Table {
  std::vector<double> t;
  std::vector<double> v;
};
struct Weighted {
  Kernel base;
  double weight;
};
struct Sum {
  std::vector<Kernel> terms;
};
struct Smoothed {
  Kernel base;
  int level;
  ApproximantKind kind;
};

struct KernelSpec {
  std::variant<LogSine, Riesz, Tent, Parabola, Table, Weighted, Sum, Smoothed> family;
};

/// The regularized kernel used by the homotopy solver.
///
/// bump:      K + sqrt(pi^2 - (t - pi)^2) / level   (strictly concave, derivative blow-up at 0)
/// log_cusp:  K + min(0, log(level * d(t, 0)))       (imposes K(0) = -inf)
/// sqrt_cusp: K + min(0, sqrt(d(t, 0)) - 1/level)   (derivative blow-up, within 1/level of K)
Kernel approximant(const Kernel& k, int level, ApproximantKind kind);

/// Reduces an angle into [0, 2pi).
double reduce_angle(double t);

}  // namespace equiosc
