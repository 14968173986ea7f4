#include "equiosc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "equiosc/errors.hpp"
#include "equiosc/parallel.hpp"

namespace equiosc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCollapseGap = 1e-9;
constexpr double kProbeStep = 1e-4;
constexpr double kProbeSlack = 1e-9;
constexpr double kMaxCondition = 1e12;

enum class Outcome { converged, stalled, singular, boundary, exhausted };

struct Iterate {
  NodeSystem y;
  ArcProfile prof;
  double res = kInf;
  Outcome outcome = Outcome::exhausted;
};

double residual_of(const ArcProfile& prof) {
  const Eigen::VectorXd d = delta(prof);
  double r = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) r = std::max(r, std::abs(d(i)));
  return r;
}

NodeSystem advance(const NodeSystem& y, const Eigen::VectorXd& step, double lam) {
  std::vector<double> v(y.values().begin(), y.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += lam * step(static_cast<Eigen::Index>(i));
  return NodeSystem(std::move(v));
}

// Largest multiple of step keeping every gap of the sigma-ordered nodes at
// least 1e-3 of its current size.
double max_step_in_simplex(const NodeSystem& y, const Permutation& sigma, const Eigen::VectorXd& step) {
  const auto v = lifted_positions(y, sigma);
  if (!v) return 0.0;
  const std::size_t n = sigma.n();
  auto moved = [&](std::size_t k) {
    return (k == 0 || k == n + 1) ? 0.0 : step(sigma(k) - 1);
  };
  double lam = kInf;
  for (std::size_t k = 0; k <= n; ++k) {
    const double gap = (*v)[k + 1] - (*v)[k];
    const double change = moved(k + 1) - moved(k);
    if (change < 0.0) lam = std::min(lam, (1.0 - 1e-3) * gap / -change);
  }
  return lam;
}

// Convex combination of the lifted positions with the equidistant ones.
NodeSystem nudge_inside(const NodeSystem& y, const Permutation& sigma, double theta) {
  const auto v = lifted_positions(y, sigma);
  const std::size_t n = sigma.n();
  std::vector<double> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double eq = kTwoPi * static_cast<double>(k) / static_cast<double>(n + 1);
    const double cur = v ? (*v)[k] : eq;
    out[static_cast<std::size_t>(sigma(k)) - 1] = (1.0 - theta) * cur + theta * eq;
  }
  return NodeSystem(std::move(out));
}

std::optional<ArcProfile> try_profile(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                                      const EvalOptions& opts) {
  if (!lifted_positions(y, sigma, opts.angle_tol)) return std::nullopt;
  return profile(p, y, sigma, opts);
}

Eigen::MatrixXd newton_jacobian(const Problem& p, const NodeSystem& y, const ArcProfile& prof,
                                const Permutation& sigma, const EvalOptions& opts) {
  try {
    return jacobian_delta(jacobian_m(p, y, prof), sigma);
  } catch (const JacobianUnavailable&) {
    const double h = std::min(1e-7, 0.25 * min_gap(y, sigma));
    return jacobian_delta(jacobian_m_fd(p, y, sigma, opts, h), sigma);
  }
}

// Separates the pair of sigma-consecutive nodes closing the smallest gap.
NodeSystem separate_collapsed(const Problem& p, const NodeSystem& y, const Permutation& sigma) {
  const auto v = lifted_positions(y, sigma);
  const std::size_t n = sigma.n();
  if (!v) return nudge_inside(y, sigma, 0.1);
  std::size_t worst = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    if ((*v)[k + 1] - (*v)[k] < (*v)[worst + 1] - (*v)[worst]) worst = k;
  }
  if (worst == 0 || worst == n) return nudge_inside(y, sigma, 0.1);
  const auto j = static_cast<std::size_t>(sigma(worst));
  const auto k = static_cast<std::size_t>(sigma(worst + 1));
  const double room = std::min((*v)[worst] - (*v)[worst - 1], (*v)[worst + 2] - (*v)[worst + 1]);
  const double h = 0.25 * room * std::min(p.kernels[j].weight(), p.kernels[k].weight());
  try {
    return pull_apart(p, y, j, k, h);
  } catch (const ValidationError&) {
    return nudge_inside(y, sigma, 0.1);
  }
}

Iterate newton(const Problem& p, const Permutation& sigma, const NodeSystem& start, const SolveOptions& opts,
               const std::string& stage, std::vector<TraceEntry>& trace) {
  Iterate it{start, profile(p, start, sigma, opts.eval), 0.0, Outcome::exhausted};
  it.res = residual_of(it.prof);
  double last_step = 0.0;
  int restarts = 0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    trace.push_back({stage, iter, it.res, last_step, it.prof.m_bar.value()});
    if (it.res <= opts.tol_residual) {
      it.outcome = Outcome::converged;
      return it;
    }
    if (!std::isfinite(it.res)) {
      it.outcome = Outcome::boundary;
      return it;
    }
    const Eigen::MatrixXd jd = newton_jacobian(p, it.y, it.prof, sigma, opts.eval);
    if (!jd.allFinite()) {
      it.outcome = Outcome::singular;
      return it;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jd, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && !(sv(0) < kMaxCondition * sv(sv.size() - 1))) {
      it.outcome = Outcome::singular;
      return it;
    }
    const Eigen::VectorXd step = svd.solve(-delta(it.prof));
    double lam = std::min(1.0, max_step_in_simplex(it.y, sigma, step));
    bool accepted = false;
    while (lam >= opts.min_step) {
      NodeSystem cand = advance(it.y, step, lam);
      if (auto cp = try_profile(p, cand, sigma, opts.eval)) {
        const double cr = residual_of(*cp);
        if (cr < (1.0 - 1e-4 * lam) * it.res) {
          it.y = std::move(cand);
          it.prof = std::move(*cp);
          it.res = cr;
          accepted = true;
          break;
        }
      }
      lam *= opts.damping_factor;
    }
    if (!accepted) {
      it.outcome = Outcome::stalled;
      return it;
    }
    last_step = lam;
    if (min_gap(it.y, sigma) < kCollapseGap) {
      if (restarts++ >= 3) {
        it.outcome = Outcome::boundary;
        return it;
      }
      it.y = separate_collapsed(p, it.y, sigma);
      it.prof = profile(p, it.y, sigma, opts.eval);
      it.res = residual_of(it.prof);
    }
  }
  it.outcome = it.res <= opts.tol_residual ? Outcome::converged : Outcome::exhausted;
  return it;
}

// Nonlinear Gauss-Seidel: each node in turn is placed where its two
// neighbouring arc maxima agree (regula falsi, Illinois variant).
Iterate gauss_seidel(const Problem& p, const Permutation& sigma, const NodeSystem& start,
                     const SolveOptions& opts, const std::string& stage, std::vector<TraceEntry>& trace,
                     int sweeps) {
  Iterate it{start, profile(p, start, sigma, opts.eval), 0.0, Outcome::exhausted};
  it.res = residual_of(it.prof);
  const std::size_t n = sigma.n();
  double best_res = it.res;
  int idle = 0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    trace.push_back({stage, sweep, it.res, 0.0, it.prof.m_bar.value()});
    if (it.res <= opts.tol_residual) {
      it.outcome = Outcome::converged;
      return it;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      const auto v = lifted_positions(it.y, sigma);
      if (!v) break;
      const auto node = static_cast<std::size_t>(sigma(k));
      const double lo = (*v)[k - 1];
      const double hi = (*v)[k + 1];
      const double pad = 1e-9 * (hi - lo);
      std::vector<double> base(it.y.values().begin(), it.y.values().end());
      auto g = [&](double x) {
        base[node - 1] = x;
        const ArcProfile pr = profile(p, NodeSystem(base), sigma, opts.eval);
        const double up = pr.by_index(sigma(k)).m.value();
        const double down = pr.by_index(sigma(k - 1)).m.value();
        if (std::isinf(up) && std::isinf(down)) return 0.0;
        if (std::isinf(up)) return -kInf;
        if (std::isinf(down)) return kInf;
        return up - down;
      };
      double a = lo + pad;
      double b = hi - pad;
      double ga = g(a);
      double gb = g(b);
      if (!(ga > 0.0 && gb < 0.0)) continue;
      int side = 0;
      double x = (*v)[k];
      for (int iter = 0; iter < 100 && b - a > 1e-15; ++iter) {
        if (std::isinf(ga) || std::isinf(gb)) {
          x = 0.5 * (a + b);
        } else {
          x = (a * gb - b * ga) / (gb - ga);
          if (!(x > a && x < b)) x = 0.5 * (a + b);
        }
        const double gx = g(x);
        if (std::abs(gx) <= 0.1 * opts.tol_residual) break;
        if (gx > 0.0) {
          a = x;
          ga = gx;
          if (side == -1 && std::isfinite(gb)) gb *= 0.5;
          side = -1;
        } else {
          b = x;
          gb = gx;
          if (side == 1 && std::isfinite(ga)) ga *= 0.5;
          side = 1;
        }
      }
      base[node - 1] = x;
      it.y = NodeSystem(base);
    }
    it.prof = profile(p, it.y, sigma, opts.eval);
    it.res = residual_of(it.prof);
    if (it.res < 0.9 * best_res) {
      best_res = it.res;
      idle = 0;
    } else if (++idle >= 3) {
      it.outcome = Outcome::stalled;
      return it;
    }
  }
  it.outcome = it.res <= opts.tol_residual ? Outcome::converged : Outcome::exhausted;
  return it;
}

Iterate run_stage(const Problem& p, const Permutation& sigma, const NodeSystem& start, const SolveOptions& opts,
                  const std::string& stage, std::vector<TraceEntry>& trace) {
  Iterate first = newton(p, sigma, start, opts, stage + "/newton", trace);
  if (first.outcome == Outcome::converged) return first;
  Iterate gs = gauss_seidel(p, sigma, first.y, opts, stage + "/gauss-seidel", trace, 40);
  if (gs.outcome == Outcome::converged) return gs;
  Iterate retry = newton(p, sigma, gs.y, opts, stage + "/newton-retry", trace);
  Iterate* best = &first;
  for (Iterate* c : {&gs, &retry}) {
    if (c->res < best->res) best = c;
  }
  return *best;
}

NodeSystem starting_point(const Problem& p, const Permutation& sigma, const SolveOptions& opts) {
  switch (opts.start) {
    case StartKind::equidistant:
      return equidistant(sigma);
    case StartKind::user: {
      if (!opts.start_nodes) throw ValidationError("start = user requires start nodes");
      const NodeSystem& y = *opts.start_nodes;
      if (y.n() != sigma.n()) throw ValidationError("start nodes have the wrong size");
      if (!lifted_positions(y, sigma)) {
        throw ValidationError("start nodes are not in the closure of the simplex " + sigma.to_string());
      }
      return min_gap(y, sigma) > kCollapseGap ? y : nudge_inside(y, sigma, 1e-3);
    }
    case StartKind::coarse_grid: {
      std::mt19937_64 rng(opts.seed);
      NodeSystem best = equidistant(sigma);
      double best_res = residual_of(profile(p, best, sigma, opts.eval));
      for (int i = 0; i < 64; ++i) {
        NodeSystem cand = sample_simplex(sigma, rng);
        const double r = residual_of(profile(p, cand, sigma, opts.eval));
        if (r < best_res) {
          best_res = r;
          best = std::move(cand);
        }
      }
      return best;
    }
  }
  return equidistant(sigma);
}

void finish_report(SolveReport& report, const Iterate& it, const Permutation& sigma, const SolveOptions& opts) {
  report.nodes = it.y;
  report.profile = it.prof;
  report.residual = it.res;
  report.objective = it.prof.m_bar.value();
  const bool collapsed = min_gap(it.y, sigma) <= kCollapseGap;
  if (it.res <= opts.tol_residual && !collapsed) {
    report.status = SolveStatus::converged;
  } else if (collapsed || it.outcome == Outcome::boundary) {
    report.status = SolveStatus::boundary_suspected;
  } else if (it.outcome == Outcome::singular) {
    report.status = SolveStatus::jacobian_singular;
  } else {
    report.status = SolveStatus::max_iter;
  }
}

bool certify_local_minimum(const Problem& p, const Permutation& sigma, const NodeSystem& w, double mbar,
                           const EvalOptions& opts) {
  for (std::size_t i = 0; i < w.n(); ++i) {
    for (double sign : {-1.0, 1.0}) {
      std::vector<double> v(w.values().begin(), w.values().end());
      v[i] += sign * kProbeStep;
      if (auto pr = try_profile(p, NodeSystem(v), sigma, opts)) {
        if (pr->m_bar.value() < mbar - kProbeSlack) return false;
      }
    }
  }
  return true;
}

bool certify_local_maximum_of_min(const Problem& p, const Permutation& sigma, const NodeSystem& w,
                                  double munder, const EvalOptions& opts) {
  for (std::size_t i = 0; i < w.n(); ++i) {
    for (double sign : {-1.0, 1.0}) {
      std::vector<double> v(w.values().begin(), w.values().end());
      v[i] += sign * kProbeStep;
      if (auto pr = try_profile(p, NodeSystem(v), sigma, opts)) {
        if (pr->m_under.value() > munder + kProbeSlack) return false;
      }
    }
  }
  return true;
}

// Smallest-norm point of the convex hull of the columns of g, by trying every
// support subset (at most n + 1 columns).
Eigen::VectorXd min_norm_hull_point(const Eigen::MatrixXd& g) {
  const auto m = static_cast<int>(g.cols());
  Eigen::VectorXd best;
  double best_norm = kInf;
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> cols;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) cols.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(cols.size());
    // KKT system of min |G l|^2 subject to sum l = 1.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) kkt(a, b) = g.col(cols[a]).dot(g.col(cols[b]));
      kkt(a, k) = 1.0;
      kkt(k, a) = 1.0;
    }
    rhs(k) = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((sol.head(k).array() < -1e-12).any()) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.rows());
    for (Eigen::Index a = 0; a < k; ++a) v += sol(a) * g.col(cols[a]);
    if (v.allFinite() && v.norm() < best_norm) {
      best_norm = v.norm();
      best = v;
    }
  }
  return best;
}

// Orthogonal projector onto directions that keep every nearly collapsed gap
// (and any node stuck on the anchor) fixed.
Eigen::MatrixXd face_projector(const NodeSystem& y, const Permutation& sigma) {
  const std::size_t n = sigma.n();
  const auto v = lifted_positions(y, sigma);
  std::vector<Eigen::VectorXd> rows;
  if (v) {
    for (std::size_t k = 0; k <= n; ++k) {
      if ((*v)[k + 1] - (*v)[k] > 1e-7) continue;
      Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      if (k >= 1) c(sigma(k) - 1) -= 1.0;
      if (k + 1 <= n) c(sigma(k + 1) - 1) += 1.0;
      rows.push_back(c);
    }
  }
  const auto dim = static_cast<Eigen::Index>(n);
  if (rows.empty()) return Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return Eigen::MatrixXd::Identity(dim, dim) - c.completeOrthogonalDecomposition().pseudoInverse() * c;
}

bool closes_collapsed_gap(const NodeSystem& y, const Permutation& sigma, const Eigen::VectorXd& dir) {
  const auto v = lifted_positions(y, sigma);
  if (!v) return false;
  const std::size_t n = sigma.n();
  auto moved = [&](std::size_t k) { return (k == 0 || k == n + 1) ? 0.0 : dir(sigma(k) - 1); };
  for (std::size_t k = 0; k <= n; ++k) {
    if ((*v)[k + 1] - (*v)[k] <= 1e-7 && moved(k + 1) - moved(k) < 0.0) return true;
  }
  return false;
}

// Nonsmooth descent on m_bar: step against the min-norm element of the
// convex hull of the gradients of the eps-active arc maxima. Near collapsed
// gaps the gradients are first projected onto the face.
void hull_descent(const Problem& p, const Permutation& sigma, Iterate& it, const SolveOptions& opts,
                  const std::string& stage, std::vector<TraceEntry>& trace) {
  double eps = 1e-3 * std::max(1.0, std::abs(it.prof.m_bar.value()));
  double h0 = 0.1;
  for (int iter = 0; iter < 20 * opts.max_iter && eps > 1e-13; ++iter) {
    const double top = it.prof.m_bar.value();
    if (!std::isfinite(top)) return;
    trace.push_back({stage, iter, it.res, h0, top});
    Eigen::MatrixXd jm;
    try {
      jm = jacobian_m(p, it.y, it.prof);
    } catch (const JacobianUnavailable&) {
      jm = jacobian_m_fd(p, it.y, sigma, opts.eval, 1e-7);
    }
    std::vector<int> active;
    for (const auto& a : it.prof.arcs) {
      if (a.m.value() >= top - eps) active.push_back(a.index);
    }
    Eigen::MatrixXd g(jm.cols(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) g.col(static_cast<Eigen::Index>(i)) = jm.row(active[i]).transpose();
    Eigen::VectorXd v = min_norm_hull_point(g);
    if (v.size() == 0) return;
    if (closes_collapsed_gap(it.y, sigma, -v)) v = min_norm_hull_point(face_projector(it.y, sigma) * g);
    const double vnorm = v.lpNorm<Eigen::Infinity>();
    bool accepted = false;
    double h = 0.0;
    if (v.size() > 0 && std::isfinite(vnorm) && vnorm > 1e-12) {
      const Eigen::VectorXd dir = -v / vnorm;
      h = std::min(h0, max_step_in_simplex(it.y, sigma, dir));
      while (h > 1e-15) {
        NodeSystem cand = advance(it.y, dir, h);
        if (auto cp = try_profile(p, cand, sigma, opts.eval)) {
          if (cp->m_bar.value() < top - 1e-4 * h * v.squaredNorm() / vnorm) {
            it.y = std::move(cand);
            it.prof = std::move(*cp);
            it.res = residual_of(it.prof);
            accepted = true;
            break;
          }
        }
        h *= 0.5;
      }
    }
    if (accepted) {
      h0 = std::min(0.5, 4.0 * h);
    } else {
      eps *= 0.1;
    }
  }
}

// Lowers m_bar along perturbation directions of the near-maximal arcs.
Iterate descend(const Problem& p, const Permutation& sigma, const NodeSystem& start, const SolveOptions& opts,
                const std::string& stage, std::vector<TraceEntry>& trace) {
  Iterate it{start, profile(p, start, sigma, opts.eval), 0.0, Outcome::exhausted};
  it.res = residual_of(it.prof);
  hull_descent(p, sigma, it, opts, stage + "/hull", trace);
  double eta_rel = 1e-8;
  double h0 = 0.1;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double mbar = it.prof.m_bar.value();
    trace.push_back({stage, iter, it.res, h0, mbar});
    const double spread = std::isfinite(it.prof.m_under.value()) ? mbar - it.prof.m_under.value() : 1.0;
    const double eta = std::max(1e-13, eta_rel * std::max(1.0, spread));
    std::vector<int> active;
    for (const auto& a : it.prof.arcs) {
      if (a.m.value() >= mbar - eta) active.push_back(a.index);
    }
    Eigen::VectorXd dir;
    try {
      dir = descent_direction(p, it.y, it.prof, active);
    } catch (const std::exception&) {
      break;
    }
    double h = std::min(h0, max_step_in_simplex(it.y, sigma, dir));
    bool accepted = false;
    while (h > 1e-14) {
      NodeSystem cand = advance(it.y, dir, h);
      if (auto cp = try_profile(p, cand, sigma, opts.eval)) {
        if (cp->m_bar.value() < mbar - 1e-15) {
          it.y = std::move(cand);
          it.prof = std::move(*cp);
          it.res = residual_of(it.prof);
          accepted = true;
          break;
        }
      }
      h *= 0.5;
    }
    if (accepted) {
      h0 = std::min(0.5, 2.0 * h);
      continue;
    }
    eta_rel *= 100.0;
    if (eta_rel > 1e-1) break;
  }
  it.outcome = it.res <= opts.tol_residual ? Outcome::converged : Outcome::stalled;
  return it;
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::boundary_suspected:
      return "boundary_suspected";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::jacobian_singular:
      return "jacobian_singular";
  }
  return "?";
}

bool minimax_hypotheses_hold(const Problem& p) {
  bool strict = true;
  bool all_prime = true;
  bool all_c1 = true;
  for (const auto& k : p.kernels) {
    const KernelClass c = k.classify();
    strict = strict && c.strictly_concave;
    all_prime = all_prime && c.cond_inf_prime;
    all_c1 = all_c1 && c.c1;
  }
  return strict && (all_prime || all_c1);
}

Eigen::MatrixXd jacobian_m_fd(const Problem& p, const NodeSystem& y, const Permutation& sigma,
                              const EvalOptions& opts, double h) {
  const std::size_t n = p.n();
  Eigen::MatrixXd jm(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  const ArcProfile centre = profile(p, y, sigma, opts);
  const auto m0 = centre.m_by_index();
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> up(y.values().begin(), y.values().end());
    std::vector<double> down = up;
    up[r] += h;
    down[r] -= h;
    auto pu = try_profile(p, NodeSystem(up), sigma, opts);
    auto pd = try_profile(p, NodeSystem(down), sigma, opts);
    std::vector<double> mu = pu ? pu->m_by_index() : m0;
    std::vector<double> md = pd ? pd->m_by_index() : m0;
    const double span = (pu ? h : 0.0) + (pd ? h : 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
      jm(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r)) = span > 0.0 ? (mu[j] - md[j]) / span : 0.0;
    }
  }
  return jm;
}

SolveReport solve_equioscillation(const Problem& p, const Permutation& sigma, const SolveOptions& opts) {
  if (sigma.n() != p.n()) throw ValidationError("permutation size does not match node count");
  SolveReport report;
  report.simplex = sigma;
  report.seed = opts.seed;
  for (std::size_t j = 0; j < p.kernels.size(); ++j) {
    if (!p.kernels[j].classify().strictly_concave) {
      report.flags.push_back("kernel " + std::to_string(j) + " is not strictly concave");
    }
  }
  const NodeSystem y0 = starting_point(p, sigma, opts);
  if (p.n() == 0) {
    Iterate it{y0, profile(p, y0, sigma, opts.eval), 0.0, Outcome::converged};
    finish_report(report, it, sigma, opts);
    return report;
  }
  Iterate best = run_stage(p, sigma, y0, opts, "direct", report.trace);
  if (best.outcome != Outcome::converged) {
    report.flags.push_back("homotopy");
    NodeSystem warm = y0;
    for (int level : opts.homotopy_levels) {
      std::vector<Kernel> smoothed;
      smoothed.reserve(p.kernels.size());
      for (const auto& k : p.kernels) smoothed.push_back(approximant(k, level, opts.homotopy_kind));
      const Problem stage_problem(std::move(smoothed));
      const std::string name = "homotopy:" + std::string(to_string(opts.homotopy_kind)) + ":" + std::to_string(level);
      Iterate st = run_stage(stage_problem, sigma, warm, opts, name, report.trace);
      if (std::isfinite(st.res) && min_gap(st.y, sigma) > kCollapseGap) warm = st.y;
    }
    Iterate fin = run_stage(p, sigma, warm, opts, "final", report.trace);
    if (fin.res < best.res) best = std::move(fin);
  }
  finish_report(report, best, sigma, opts);
  return report;
}

SolveReport minimax(const Problem& p, const Permutation& sigma, const SolveOptions& opts) {
  SolveReport report = solve_equioscillation(p, sigma, opts);
  const bool hypotheses = minimax_hypotheses_hold(p);
  if (!hypotheses) report.flags.push_back("minimax hypotheses not met; equioscillation point may not be minimal");
  if (p.n() == 0) return report;

  bool certified = false;
  if (report.status == SolveStatus::converged) {
    certified = certify_local_minimum(p, sigma, report.nodes, report.objective, opts.eval);
    if (!certified) report.flags.push_back("non_minimal_equioscillation");
  }
  if (certified && hypotheses) return report;

  // Perturbation descent from the equioscillation point, the equidistant
  // system and random seeds; keep the lowest m_bar.
  std::vector<NodeSystem> seeds;
  if (min_gap(report.nodes, sigma) > kCollapseGap) seeds.push_back(report.nodes);
  seeds.push_back(equidistant(sigma));
  std::mt19937_64 rng(opts.seed);
  for (int i = 0; i < opts.multistart; ++i) seeds.push_back(sample_simplex(sigma, rng));
  // Plus the lowest m_bar values among a batch of random samples.
  std::vector<std::pair<double, NodeSystem>> pool;
  for (int i = 0; i < 64 * static_cast<int>(sigma.n()); ++i) {
    NodeSystem y = sample_simplex(sigma, rng);
    const double v = profile(p, y, sigma, opts.eval).m_bar.value();
    pool.emplace_back(v, std::move(y));
  }
  std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < std::min<std::size_t>(3, pool.size()); ++i) seeds.push_back(pool[i].second);

  std::vector<Iterate> results(seeds.size());
  std::vector<std::vector<TraceEntry>> traces(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    results[i] = descend(p, sigma, seeds[i], opts, "descent:" + std::to_string(i), traces[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].prof.m_bar < results[best].prof.m_bar) best = i;
  }
  for (const auto& t : traces) report.trace.insert(report.trace.end(), t.begin(), t.end());
  report.flags.push_back("perturbation_descent");
  const double found = results[best].prof.m_bar.value();
  if (report.status == SolveStatus::converged && certified && found >= report.objective - kProbeSlack) {
    return report;
  }
  if (report.status != SolveStatus::converged || found < report.objective) {
    finish_report(report, results[best], sigma, opts);
    if (report.status == SolveStatus::max_iter && min_gap(report.nodes, sigma) < 1e-6) {
      report.status = SolveStatus::boundary_suspected;
    }
  }
  return report;
}

GlobalReport minimax_global(const Problem& p, const SolveOptions& opts) {
  const std::size_t n = p.n();
  if (n > opts.max_global_n) {
    throw ValidationError("n = " + std::to_string(n) + " exceeds the exhaustive sweep cap " +
                          std::to_string(opts.max_global_n) + "; pass an explicit sigma list");
  }
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i) + 1;
  std::vector<Permutation> all;
  std::vector<std::size_t> rep_of;
  std::map<std::string, std::size_t> seen;
  std::vector<std::size_t> reps;
  do {
    std::string key;
    for (int j : perm) key += p.kernels[static_cast<std::size_t>(j)].canonical() + "|";
    const auto [pos, inserted] = seen.emplace(key, reps.size());
    if (inserted) reps.push_back(all.size());
    rep_of.push_back(pos->second);
    all.emplace_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<SolveReport> solved(reps.size());
  parallel_for(reps.size(), [&](std::size_t i) { solved[i] = minimax(p, all[reps[i]], opts); });

  GlobalReport out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < solved.size(); ++i) {
    if (solved[i].objective < solved[best].objective) best = i;
  }
  out.best = solved[best];
  for (std::size_t i = 0; i < all.size(); ++i) {
    const SolveReport& r = solved[rep_of[i]];
    out.table.push_back({all[i], all[reps[rep_of[i]]], r.objective, r.status});
  }
  return out;
}

SolveReport maximin(const Problem& p, const Permutation& sigma, const SolveOptions& opts) {
  if (sigma.n() != p.n()) throw ValidationError("permutation size does not match node count");
  SolveReport report;
  report.simplex = sigma;
  report.seed = opts.seed;
  for (std::size_t j = 0; j < p.kernels.size(); ++j) {
    if (!p.kernels[j].classify().strictly_concave) {
      report.flags.push_back("kernel " + std::to_string(j) + " is not strictly concave");
    }
  }
  Iterate it{starting_point(p, sigma, opts), {}, 0.0, Outcome::exhausted};
  it.prof = profile(p, it.y, sigma, opts.eval);
  it.res = residual_of(it.prof);
  if (p.n() == 0) {
    finish_report(report, it, sigma, opts);
    report.objective = it.prof.m_under.value();
    return report;
  }

  // Supergradient ascent on m_under: average the gradients of the
  // near-minimal arc maxima and backtrack until m_under increases.
  double eta_rel = 1e-6;
  double h0 = 0.1;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double mu = it.prof.m_under.value();
    report.trace.push_back({"ascent", iter, it.res, h0, mu});
    if (it.res <= opts.tol_residual) break;
    const double spread = std::isfinite(mu) ? it.prof.m_bar.value() - mu : 1.0;
    const double eta = eta_rel * std::max(1.0, spread);
    Eigen::MatrixXd jm;
    try {
      jm = jacobian_m(p, it.y, it.prof);
    } catch (const JacobianUnavailable&) {
      jm = jacobian_m_fd(p, it.y, sigma, opts.eval, 1e-7);
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n()));
    int count = 0;
    for (const auto& a : it.prof.arcs) {
      if (a.m.value() <= mu + eta) {
        dir += jm.row(a.index).transpose();
        ++count;
      }
    }
    if (count == 0 || !dir.allFinite() || dir.lpNorm<Eigen::Infinity>() == 0.0) break;
    dir /= dir.lpNorm<Eigen::Infinity>();
    double h = std::min(h0, max_step_in_simplex(it.y, sigma, dir));
    bool accepted = false;
    while (h > 1e-14) {
      NodeSystem cand = advance(it.y, dir, h);
      if (auto cp = try_profile(p, cand, sigma, opts.eval)) {
        if (cp->m_under.value() > mu + 1e-15) {
          it.y = std::move(cand);
          it.prof = std::move(*cp);
          it.res = residual_of(it.prof);
          accepted = true;
          break;
        }
      }
      h *= 0.5;
    }
    if (accepted) {
      h0 = std::min(0.5, 2.0 * h);
      continue;
    }
    if (eta_rel > 0.0 && eta_rel < 1e-1) {
      eta_rel *= 100.0;
      continue;
    }
    break;
  }

  // At the maximin point of a strictly concave m_under all arc maxima agree
  // whenever an equioscillation point exists; polish with the Newton solve.
  Iterate polished = run_stage(p, sigma, it.y, opts, "polish", report.trace);
  if (polished.outcome == Outcome::converged &&
      polished.prof.m_under.value() >= it.prof.m_under.value() - 1e-12) {
    it = std::move(polished);
    report.flags.push_back("newton_polish");
  }
  finish_report(report, it, sigma, opts);
  report.objective = it.prof.m_under.value();
  const bool certified = certify_local_maximum_of_min(p, sigma, it.y, report.objective, opts.eval);
  if (!certified) report.flags.push_back("uncertified_maximum");
  if (certified && report.status == SolveStatus::max_iter) report.status = SolveStatus::converged;
  return report;
}

Eigen::VectorXd descent_direction(const Problem& p, const NodeSystem& y, const ArcProfile& prof,
                                  const std::vector<int>& active, const std::vector<Eigen::VectorXd>& frozen) {
  const std::size_t n = p.n();
  if (active.empty()) throw ValidationError("descent_direction needs at least one active arc");
  if (active.size() > n) {
    throw InfeasibleDirection("all arcs active: no direction lowers every arc maximum (equioscillation)");
  }
  const auto rows = static_cast<Eigen::Index>(active.size() + frozen.size());
  const auto cols = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const ArcMax& arc = prof.by_index(active[i]);
    if (arc.end - arc.start <= kAngleTol || arc.z_on_boundary) {
      throw ValidationError("active arc " + std::to_string(arc.index) + " has no interior maximizer");
    }
    for (std::size_t r = 1; r <= n; ++r) {
      const double x = arc.z - y.node(r);
      if (torus_dist(arc.z, y.node(r)) <= kAngleTol) {
        throw ValidationError("maximizer of arc " + std::to_string(arc.index) + " sits on a node");
      }
      // Any value in [D+, D-] is a supporting slope; take the midpoint.
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r - 1)) =
          0.5 * (p.kernels[r].deriv(x, Side::left) + p.kernels[r].deriv(x, Side::right));
    }
    b(static_cast<Eigen::Index>(i)) = 1.0;
  }
  for (std::size_t l = 0; l < frozen.size(); ++l) {
    if (frozen[l].size() != cols) throw ValidationError("frozen constraint has the wrong length");
    a.row(static_cast<Eigen::Index>(active.size() + l)) = frozen[l].transpose();
  }
  const auto satisfies = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd r = a * v;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (r(static_cast<Eigen::Index>(i)) < -1e-12) return false;
    }
    for (std::size_t l = 0; l < frozen.size(); ++l) {
      if (std::abs(r(static_cast<Eigen::Index>(active.size() + l))) > 1e-9) return false;
    }
    return v.lpNorm<Eigen::Infinity>() > 0.0;
  };
  const auto normalized = [](Eigen::VectorXd v) { return Eigen::VectorXd(v / v.lpNorm<Eigen::Infinity>()); };

  // Least squares for A a = (1,..,1,0,..,0).
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd ls = cod.solve(b);
  if ((a * ls - b).norm() <= 1e-9 * (1.0 + b.norm()) && satisfies(ls)) return normalized(ls);

  // Rank deficient: any null vector of A satisfies every constraint with equality.
  if (cod.rank() < cols) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd v = svd.matrixV().col(cols - 1);
    if (satisfies(v)) return normalized(v);
  }

  if (n <= 4) {
    Eigen::VectorXd best;
    double best_score = -kInf;
    const int total = static_cast<int>(std::pow(3, n));
    for (int code = 0; code < total; ++code) {
      Eigen::VectorXd v(cols);
      int c = code;
      for (Eigen::Index r = 0; r < cols; ++r, c /= 3) v(r) = static_cast<double>(c % 3) - 1.0;
      if (!satisfies(v)) continue;
      double score = kInf;
      for (std::size_t i = 0; i < active.size(); ++i) {
        score = std::min(score, a.row(static_cast<Eigen::Index>(i)).dot(v));
      }
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    if (best.size() > 0) return best;
  }
  throw InfeasibleDirection("no admissible descent direction for the given active set");
}

NodeSystem pull_apart(const Problem& p, const NodeSystem& y, std::size_t j, std::size_t k, double h) {
  if (j < 1 || j > y.n() || k < 1 || k > y.n() || j == k) {
    throw ValidationError("pull_apart needs two distinct free nodes");
  }
  if (h < 0.0) throw ValidationError("pull_apart step must be non-negative");
  if (h == 0.0) return y;
  const double left = y.node(j);
  const double right = y.node(k);
  if (left > right + kAngleTol) throw ValidationError("pull_apart expects y_j <= y_k");
  const double b = 1.0 / p.kernels[j].weight();
  const double a = 1.0 / p.kernels[k].weight();
  const double bound = std::min(left / b, (kTwoPi - right) / a);
  if (!(h < bound)) {
    throw ValidationError("pull_apart step " + std::to_string(h) + " exceeds the admissible bound " +
                          std::to_string(bound));
  }
  std::vector<double> v(y.values().begin(), y.values().end());
  v[j - 1] = left - b * h;
  v[k - 1] = right + a * h;
  return NodeSystem(std::move(v));
}

}  // namespace equiosc
