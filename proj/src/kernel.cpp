#include "equiosc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "equiosc/errors.hpp"

namespace equiosc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Torus distance of x in [0, 2pi) from 0.
double dist_from_zero(double x) { return std::min(x, kTwoPi - x); }

// Additive term of a smoothed kernel, as an extended value.
double smoothing_term(double x, int level, ApproximantKind kind) {
  const double k = level;
  switch (kind) {
    case ApproximantKind::bump:
      return std::sqrt(std::max(0.0, x * (kTwoPi - x))) / k;
    case ApproximantKind::log_cusp:
      if (x == 0.0) return -kInf;
      return std::min(0.0, std::log(k * dist_from_zero(x)));
    case ApproximantKind::sqrt_cusp:
      return std::min(0.0, std::sqrt(dist_from_zero(x)) - 1.0 / k);
  }
  return 0.0;
}

// One-sided derivative of the smoothing term. The cusp terms are
// log/sqrt of the distance to 0 below a threshold and flat beyond it.
double smoothing_deriv(double x, Side side, int level, ApproximantKind kind) {
  const double k = level;
  if (x == 0.0) return side == Side::right ? kInf : -kInf;
  if (kind == ApproximantKind::bump) {
    return (kPi - x) / (k * std::sqrt(x * (kTwoPi - x)));
  }
  const double threshold = kind == ApproximantKind::log_cusp ? 1.0 / k : 1.0 / (k * k);
  auto slope = [&](double d) {
    return kind == ApproximantKind::log_cusp ? 1.0 / d : 0.5 / std::sqrt(d);
  };
  if (x < kPi) {
    if (x < threshold) return slope(x);
    if (x == threshold && side == Side::left) return slope(x);
    return 0.0;
  }
  const double u = kTwoPi - x;
  if (u < threshold) return -slope(u);
  if (u == threshold && side == Side::right) return -slope(u);
  return 0.0;
}

struct EvalVisitor {
  double x;
  double operator()(const LogSine&) const {
    if (x == 0.0) return -kInf;
    return std::log(std::sin(0.5 * x));
  }
  double operator()(const Riesz& r) const {
    if (x == 0.0) return -kInf;
    return -std::pow(2.0 * std::sin(0.5 * x), -r.p);
  }
  double operator()(const Tent&) const { return kPi - std::abs(x - kPi); }
  double operator()(const Parabola&) const { return x * (kTwoPi - x); }
  double operator()(const Table& tab) const {
    auto it = std::upper_bound(tab.t.begin(), tab.t.end(), x);
    std::size_t i = static_cast<std::size_t>(it - tab.t.begin());
    if (i == 0) return tab.v.front();
    if (i >= tab.t.size()) return tab.v.back();
    const double w = (x - tab.t[i - 1]) / (tab.t[i] - tab.t[i - 1]);
    return tab.v[i - 1] + w * (tab.v[i] - tab.v[i - 1]);
  }
  double operator()(const Weighted& w) const { return w.weight * w.base.eval(x).value(); }
  double operator()(const Sum& s) const {
    double acc = 0.0;
    for (const auto& term : s.terms) acc += term.eval(x).value();
    return acc;
  }
  double operator()(const Smoothed& s) const {
    return s.base.eval(x).value() + smoothing_term(x, s.level, s.kind);
  }
};

struct DerivVisitor {
  double x;
  Side side;
  double operator()(const LogSine&) const {
    if (x == 0.0) return side == Side::right ? kInf : -kInf;
    return 0.5 / std::tan(0.5 * x);
  }
  double operator()(const Riesz& r) const {
    if (x == 0.0) return side == Side::right ? kInf : -kInf;
    return r.p * std::pow(2.0 * std::sin(0.5 * x), -r.p - 1.0) * std::cos(0.5 * x);
  }
  double operator()(const Tent&) const {
    if (x == 0.0) return side == Side::right ? 1.0 : -1.0;
    if (side == Side::right) return x < kPi ? 1.0 : -1.0;
    return x <= kPi ? 1.0 : -1.0;
  }
  double operator()(const Parabola&) const {
    if (x == 0.0) return side == Side::right ? kTwoPi : -kTwoPi;
    return kTwoPi - 2.0 * x;
  }
  double operator()(const Table& tab) const {
    const std::size_t segments = tab.t.size() - 1;
    auto slope = [&](std::size_t i) { return (tab.v[i + 1] - tab.v[i]) / (tab.t[i + 1] - tab.t[i]); };
    if (x == 0.0) return side == Side::right ? slope(0) : slope(segments - 1);
    if (side == Side::right) {
      auto it = std::upper_bound(tab.t.begin(), tab.t.end(), x);
      std::size_t i = static_cast<std::size_t>(it - tab.t.begin()) - 1;
      return slope(std::min(i, segments - 1));
    }
    auto it = std::lower_bound(tab.t.begin(), tab.t.end(), x);
    std::size_t i = static_cast<std::size_t>(it - tab.t.begin());
    return slope(std::clamp<std::size_t>(i, 1, segments) - 1);
  }
  double operator()(const Weighted& w) const { return w.weight * w.base.deriv(x, side); }
  double operator()(const Sum& s) const {
    double acc = 0.0;
    for (const auto& term : s.terms) acc += term.deriv(x, side);
    return acc;
  }
  double operator()(const Smoothed& s) const {
    return s.base.deriv(x, side) + smoothing_deriv(x, side, s.level, s.kind);
  }
};

struct SecondVisitor {
  double x;
  double operator()(const LogSine&) const {
    const double s = std::sin(0.5 * x);
    return -0.25 / (s * s);
  }
  double operator()(const Riesz& r) const {
    const double s = std::sin(0.5 * x);
    const double c = std::cos(0.5 * x);
    return -r.p * std::pow(2.0 * s, -r.p - 2.0) * ((r.p + 1.0) * c * c + s * s);
  }
  double operator()(const Tent&) const { throw CapabilityError("tent kernel is not C2"); }
  double operator()(const Parabola&) const { return -2.0; }
  double operator()(const Table&) const { throw CapabilityError("table kernel is not C2"); }
  double operator()(const Weighted& w) const { return w.weight * w.base.second_deriv(x); }
  double operator()(const Sum& s) const {
    double acc = 0.0;
    for (const auto& term : s.terms) acc += term.second_deriv(x);
    return acc;
  }
  double operator()(const Smoothed& s) const {
    if (s.kind != ApproximantKind::bump) {
      throw CapabilityError("cusp-smoothed kernel is not C2");
    }
    const double q = x * (kTwoPi - x);
    return s.base.second_deriv(x) - kPi * kPi / (s.level * q * std::sqrt(q));
  }
};

struct ClassifyVisitor {
  KernelClass operator()(const LogSine&) const { return singular_smooth(); }
  KernelClass operator()(const Riesz&) const { return singular_smooth(); }
  KernelClass operator()(const Tent&) const {
    KernelClass c;
    c.finite_at_zero = true;
    c.even_symmetric = true;
    return c;
  }
  KernelClass operator()(const Parabola&) const {
    KernelClass c;
    c.finite_at_zero = true;
    c.c1 = c.c2 = true;
    c.strictly_concave = true;
    c.even_symmetric = true;
    return c;
  }
  KernelClass operator()(const Table& tab) const {
    KernelClass c;
    c.finite_at_zero = true;
    bool even = true;
    EvalVisitor ev{0.0};
    for (double t : tab.t) {
      ev.x = reduce_angle(kTwoPi - t);
      const double mirrored = ev(tab);
      ev.x = t;
      if (std::abs(mirrored - ev(tab)) > 1e-12 * (1.0 + std::abs(mirrored))) even = false;
    }
    c.even_symmetric = even;
    return c;
  }
  KernelClass operator()(const Weighted& w) const { return w.base.classify(); }
  KernelClass operator()(const Sum& s) const {
    KernelClass c;
    c.finite_at_zero = c.c1 = c.c2 = c.even_symmetric = true;
    for (const auto& term : s.terms) {
      const KernelClass t = term.classify();
      c.finite_at_zero = c.finite_at_zero && t.finite_at_zero;
      c.cond_inf = c.cond_inf || t.cond_inf;
      c.cond_inf_prime_minus = c.cond_inf_prime_minus || t.cond_inf_prime_minus;
      c.cond_inf_prime_plus = c.cond_inf_prime_plus || t.cond_inf_prime_plus;
      c.c1 = c.c1 && t.c1;
      c.c2 = c.c2 && t.c2;
      c.strictly_concave = c.strictly_concave || t.strictly_concave;
      c.even_symmetric = c.even_symmetric && t.even_symmetric;
    }
    c.cond_inf_prime = c.cond_inf_prime_minus || c.cond_inf_prime_plus;
    return c;
  }
  KernelClass operator()(const Smoothed& s) const {
    KernelClass c = s.base.classify();
    switch (s.kind) {
      case ApproximantKind::bump:
        c.strictly_concave = true;
        break;
      case ApproximantKind::log_cusp:
        c.finite_at_zero = false;
        c.cond_inf = true;
        c.c1 = c.c2 = false;
        break;
      case ApproximantKind::sqrt_cusp:
        c.c1 = c.c2 = false;
        break;
    }
    c.cond_inf_prime_minus = c.cond_inf_prime_plus = c.cond_inf_prime = true;
    return c;
  }

  static KernelClass singular_smooth() {
    KernelClass c;
    c.cond_inf = c.cond_inf_prime_minus = c.cond_inf_prime_plus = c.cond_inf_prime = true;
    c.c1 = c.c2 = true;
    c.strictly_concave = true;
    c.even_symmetric = true;
    return c;
  }
};

struct CanonicalVisitor {
  std::string operator()(const LogSine&) const { return "log_sine"; }
  std::string operator()(const Riesz& r) const { return "riesz(" + fmt_double(r.p) + ")"; }
  std::string operator()(const Tent&) const { return "tent"; }
  std::string operator()(const Parabola&) const { return "parabola"; }
  std::string operator()(const Table& tab) const {
    std::string s = "table(";
    for (std::size_t i = 0; i < tab.t.size(); ++i) {
      if (i) s += ";";
      s += fmt_double(tab.t[i]) + ":" + fmt_double(tab.v[i]);
    }
    return s + ")";
  }
  std::string operator()(const Weighted& w) const {
    return "weighted(" + fmt_double(w.weight) + "," + w.base.canonical() + ")";
  }
  std::string operator()(const Sum& s) const {
    std::string out = "sum(";
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
      if (i) out += ",";
      out += s.terms[i].canonical();
    }
    return out + ")";
  }
  std::string operator()(const Smoothed& s) const {
    return "smoothed(" + s.base.canonical() + "," + std::to_string(s.level) + "," +
           std::string(to_string(s.kind)) + ")";
  }
};

}  // namespace

std::string_view to_string(ApproximantKind kind) {
  switch (kind) {
    case ApproximantKind::bump:
      return "bump";
    case ApproximantKind::log_cusp:
      return "log_cusp";
    case ApproximantKind::sqrt_cusp:
      return "sqrt_cusp";
  }
  return "?";
}

ApproximantKind approximant_kind_from_string(std::string_view name) {
  if (name == "bump") return ApproximantKind::bump;
  if (name == "log_cusp") return ApproximantKind::log_cusp;
  if (name == "sqrt_cusp") return ApproximantKind::sqrt_cusp;
  throw ValidationError("unknown approximant kind '" + std::string(name) + "'");
}

double reduce_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Kernel Kernel::log_sine() { return Kernel(std::make_shared<KernelSpec>(KernelSpec{LogSine{}})); }

Kernel Kernel::riesz(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("riesz exponent must be positive");
  return Kernel(std::make_shared<KernelSpec>(KernelSpec{Riesz{p}}));
}

Kernel Kernel::tent() { return Kernel(std::make_shared<KernelSpec>(KernelSpec{Tent{}})); }

Kernel Kernel::parabola() { return Kernel(std::make_shared<KernelSpec>(KernelSpec{Parabola{}})); }

Kernel Kernel::table(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.size() < 2) {
    throw ValidationError("table kernel needs at least two (t, value) samples");
  }
  constexpr double tol = 1e-12;
  if (std::abs(t.front()) > tol || std::abs(t.back() - kTwoPi) > tol) {
    throw ValidationError("table kernel samples must span [0, 2pi]");
  }
  t.front() = 0.0;
  t.back() = kTwoPi;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(v[i])) {
      throw ValidationError("table kernel samples must be finite");
    }
    if (i > 0 && !(t[i] > t[i - 1])) throw ValidationError("table kernel abscissae must increase");
  }
  if (std::abs(v.front() - v.back()) > tol * (1.0 + std::abs(v.front()))) {
    throw ValidationError("table kernel must have equal values at 0 and 2pi");
  }
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double slope = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
    if (slope > prev_slope + 1e-12 * (1.0 + std::abs(prev_slope))) {
      throw ValidationError("table kernel is not concave near t = " + fmt_double(t[i]));
    }
    prev_slope = slope;
  }
  return Kernel(std::make_shared<KernelSpec>(KernelSpec{Table{std::move(t), std::move(v)}}));
}

Kernel Kernel::weighted(Kernel base, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ValidationError("kernel weight must be positive");
  return Kernel(std::make_shared<KernelSpec>(KernelSpec{Weighted{std::move(base), weight}}));
}

Kernel Kernel::sum(std::vector<Kernel> terms) {
  if (terms.empty()) throw ValidationError("sum kernel needs at least one term");
  return Kernel(std::make_shared<KernelSpec>(KernelSpec{Sum{std::move(terms)}}));
}

Kernel Kernel::smoothed(Kernel base, int level, ApproximantKind kind) {
  if (level < 1) throw ValidationError("approximant level must be >= 1");
  return Kernel(std::make_shared<KernelSpec>(KernelSpec{Smoothed{std::move(base), level, kind}}));
}

ExtReal Kernel::eval(double t) const {
  return ExtReal::from_double(std::visit(EvalVisitor{reduce_angle(t)}, spec_->family));
}

double Kernel::deriv(double t, Side side) const {
  return std::visit(DerivVisitor{reduce_angle(t), side}, spec_->family);
}

double Kernel::second_deriv(double t) const {
  const double x = reduce_angle(t);
  if (x == 0.0) throw ValidationError("second derivative requested at the gluing point 0");
  return std::visit(SecondVisitor{x}, spec_->family);
}

KernelClass Kernel::classify() const { return std::visit(ClassifyVisitor{}, spec_->family); }

std::string Kernel::canonical() const { return std::visit(CanonicalVisitor{}, spec_->family); }

double Kernel::weight() const {
  if (const auto* w = std::get_if<Weighted>(&spec_->family)) return w->weight;
  return 1.0;
}

Kernel approximant(const Kernel& k, int level, ApproximantKind kind) {
  return Kernel::smoothed(k, level, kind);
}

}  // namespace equiosc
