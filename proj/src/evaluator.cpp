#include "equiosc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "equiosc/errors.hpp"

namespace equiosc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPlateauWidth = 1e-9;

double golden_maximize(const Problem& p, const NodeSystem& y, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double t) { return sum_translates(p, y, t).value(); };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

ArcMax arc_max_golden(const Problem& p, const NodeSystem& y, const Arc& arc, const EvalOptions& opts,
                      ArcMax out) {
  auto f = [&](double t) { return sum_translates(p, y, t).value(); };
  double a = arc.start;
  double b = arc.end;
  const double step = std::min(arc.length() / 4.0, 1e-3);
  while (!std::isfinite(f(a)) && a < b) a += step;
  while (!std::isfinite(f(b)) && b > a) b -= step;
  double z = golden_maximize(p, y, a, b, opts.tol_z);
  if (p.all_c2() && z > arc.start && z < arc.end) {
    double d2 = 0.0;
    for (std::size_t j = 0; j <= p.n(); ++j) d2 += p.kernels[j].second_deriv(z - y.node(j));
    const double d1 = sum_translates_deriv(p, y, z, Side::right);
    if (d2 < 0.0) {
      const double polished = z - d1 / d2;
      if (polished > arc.start && polished < arc.end && f(polished) >= f(z)) z = polished;
    }
  }
  for (double endpoint : {arc.start, arc.end}) {
    if (f(endpoint) > f(z)) z = endpoint;
  }
  out.z = z;
  out.m = sum_translates(p, y, z);
  return out;
}

// Maximizing set of the concave F(y, .) on [s, e] is [L, R] with
// L = sup{t : D+F(t) > 0} and R = inf{t : D-F(t) < 0}.
ArcMax arc_max_bisection(const Problem& p, const NodeSystem& y, const Arc& arc, const EvalOptions& opts,
                         ArcMax out) {
  const double s = arc.start;
  const double e = arc.end;
  auto dplus = [&](double t) { return sum_translates_deriv(p, y, t, Side::right); };
  auto dminus = [&](double t) { return sum_translates_deriv(p, y, t, Side::left); };
  const double dplus_s = dplus(s);
  const double dminus_e = dminus(e);

  double left = s;
  if (dplus_s > 0.0) {
    if (dminus_e > 0.0) {
      left = e;
    } else {
      double lo = s;
      double hi = e;
      while (hi - lo > opts.tol_z) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (dplus(mid) > 0.0 ? lo : hi) = mid;
      }
      left = 0.5 * (lo + hi);
    }
  }
  double right = e;
  if (dplus_s < 0.0) {
    right = s;
  } else if (dminus_e < 0.0) {
    // D-F(L) >= 0, so the search for R starts at L.
    double lo = left;
    double hi = e;
    while (hi - lo > opts.tol_z) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (dminus(mid) < 0.0 ? hi : lo) = mid;
    }
    right = 0.5 * (lo + hi);
  }
  if (right < left) std::swap(left, right);
  out.z = 0.5 * (left + right);
  out.non_unique = right - left > kPlateauWidth;
  out.m = sum_translates(p, y, out.z);
  return out;
}

}  // namespace

Problem::Problem(std::vector<Kernel> k) : kernels(std::move(k)) {
  if (kernels.empty()) throw ValidationError("a problem needs at least the anchored kernel K_0");
}

bool Problem::all_c1() const {
  return std::all_of(kernels.begin(), kernels.end(), [](const Kernel& k) { return k.classify().c1; });
}

bool Problem::all_c2() const {
  return std::all_of(kernels.begin(), kernels.end(), [](const Kernel& k) { return k.classify().c2; });
}

const ArcMax& ArcProfile::by_index(int j) const {
  for (const auto& a : arcs) {
    if (a.index == j) return a;
  }
  throw ValidationError("no arc with index " + std::to_string(j));
}

std::vector<double> ArcProfile::m_by_index() const {
  std::vector<double> m(arcs.size());
  for (const auto& a : arcs) m[static_cast<std::size_t>(a.index)] = a.m.value();
  return m;
}

ExtReal sum_translates(const Problem& p, const NodeSystem& y, double t) {
  if (y.n() != p.n()) throw ValidationError("node count does not match the number of kernels");
  ExtReal acc = p.kernels[0].eval(t);
  for (std::size_t j = 1; j <= p.n(); ++j) acc += p.kernels[j].eval(t - y.node(j));
  return acc;
}

ExtReal sum_translates_full(const Problem& p, std::span<const double> y_full, double t) {
  if (y_full.size() != p.kernels.size()) throw ValidationError("need one position per kernel");
  ExtReal acc;
  for (std::size_t j = 0; j < y_full.size(); ++j) acc += p.kernels[j].eval(t - y_full[j]);
  return acc;
}

double sum_translates_deriv(const Problem& p, const NodeSystem& y, double t, Side side) {
  double acc = 0.0;
  for (std::size_t j = 0; j <= p.n(); ++j) acc += p.kernels[j].deriv(t - y.node(j), side);
  return acc;
}

ArcMax arc_max(const Problem& p, const NodeSystem& y, const Arc& arc, const EvalOptions& opts) {
  ArcMax out;
  out.index = arc.index;
  out.start = arc.start;
  out.end = arc.end;
  if (arc.length() <= opts.angle_tol) {
    out.z = arc.start;
    out.m = sum_translates(p, y, arc.start);
    out.z_on_boundary = true;
    return out;
  }
  out = opts.method == MaximizerMethod::golden_section ? arc_max_golden(p, y, arc, opts, out)
                                                        : arc_max_bisection(p, y, arc, opts, out);
  const double edge = 4.0 * opts.tol_z;
  out.z_on_boundary = out.z - arc.start <= edge || arc.end - out.z <= edge;
  return out;
}

ArcMax arc_max(const Problem& p, const NodeSystem& y, const Permutation& sigma, int j,
               const EvalOptions& opts) {
  return arc_max(p, y, arcs(y, sigma, opts.angle_tol).by_index(j), opts);
}

ArcProfile profile(const Problem& p, const NodeSystem& y, const Permutation& sigma, const EvalOptions& opts) {
  if (y.n() != p.n()) throw ValidationError("node count does not match the number of kernels");
  const ArcPartition part = arcs(y, sigma, opts.angle_tol);
  ArcProfile prof{sigma, {}, ExtReal::neg_inf(), ExtReal::neg_inf()};
  prof.arcs.reserve(part.arcs.size());
  for (const auto& a : part.arcs) prof.arcs.push_back(arc_max(p, y, a, opts));
  prof.m_bar = prof.arcs.front().m;
  prof.m_under = prof.arcs.front().m;
  for (const auto& a : prof.arcs) {
    prof.m_bar = std::max(prof.m_bar, a.m);
    prof.m_under = std::min(prof.m_under, a.m);
  }
  return prof;
}

ExtReal sup_F(const Problem& p, const NodeSystem& y, const EvalOptions& opts) {
  const SimplexLocation loc = locate(y, opts.angle_tol);
  return profile(p, y, loc.permutations.front(), opts).m_bar;
}

Eigen::MatrixXd jacobian_m(const Problem& p, const NodeSystem& y, const ArcProfile& prof) {
  const std::size_t n = p.n();
  for (std::size_t r = 1; r <= n; ++r) {
    if (!p.kernels[r].classify().c1) {
      throw JacobianUnavailable("kernel " + std::to_string(r) + " is not C1");
    }
  }
  for (const auto& a : prof.arcs) {
    if (a.z_on_boundary) {
      throw JacobianUnavailable("maximizer of arc " + std::to_string(a.index) + " lies on the arc boundary");
    }
  }
  Eigen::MatrixXd jm(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  for (const auto& a : prof.arcs) {
    for (std::size_t r = 1; r <= n; ++r) {
      const double x = a.z - y.node(r);
      const double d = 0.5 * (p.kernels[r].deriv(x, Side::left) + p.kernels[r].deriv(x, Side::right));
      jm(a.index, static_cast<Eigen::Index>(r - 1)) = -d;
    }
  }
  return jm;
}

Eigen::MatrixXd jacobian_m(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                           const EvalOptions& opts) {
  return jacobian_m(p, y, profile(p, y, sigma, opts));
}

Eigen::VectorXd delta(const ArcProfile& prof) {
  const auto m = prof.m_by_index();
  const std::size_t n = prof.sigma.n();
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    const double hi = m[static_cast<std::size_t>(prof.sigma(k))];
    const double lo = m[static_cast<std::size_t>(prof.sigma(k - 1))];
    d(static_cast<Eigen::Index>(k - 1)) = (std::isinf(hi) || std::isinf(lo)) ? kInf : hi - lo;
  }
  return d;
}

Eigen::VectorXd delta(const Problem& p, const NodeSystem& y, const Permutation& sigma, const EvalOptions& opts) {
  return delta(profile(p, y, sigma, opts));
}

Eigen::MatrixXd jacobian_delta(const Eigen::MatrixXd& jm, const Permutation& sigma) {
  const std::size_t n = sigma.n();
  Eigen::MatrixXd jd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    jd.row(static_cast<Eigen::Index>(k - 1)) = jm.row(sigma(k)) - jm.row(sigma(k - 1));
  }
  return jd;
}

Eigen::MatrixXd jacobian_delta(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                               const EvalOptions& opts) {
  return jacobian_delta(jacobian_m(p, y, sigma, opts), sigma);
}

}  // namespace equiosc
