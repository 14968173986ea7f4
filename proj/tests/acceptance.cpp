// Acceptance run: one PASS/FAIL line per criterion, with measured runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equiosc/bojanov.hpp"
#include "equiosc/errors.hpp"
#include "equiosc/oracle.hpp"
#include "equiosc/solver.hpp"

using namespace equiosc;

namespace {

constexpr double kEps = 0.1;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome result() {
    out_.detail = out_.pass ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_);
    return out_;
  }

 private:
  Outcome out_;
  std::string notes_;
  std::string failures_;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Problem tent_parabola() {
  const Kernel q = Kernel::weighted(Kernel::parabola(), kEps);
  return Problem({Kernel::tent(), Kernel::tent(), q, q});
}

Problem smoothed_tent_parabola(int level) {
  std::vector<Kernel> ks;
  for (const Kernel& k : tent_parabola().kernels) ks.push_back(approximant(k, level, ApproximantKind::bump));
  return Problem(std::move(ks));
}

Problem replicated(const Kernel& k, std::size_t n) { return Problem(std::vector<Kernel>(n + 1, k)); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Outcome criterion1() {
  Checker c;
  const Problem p = tent_parabola();
  const Permutation s = Permutation::parse("2,1,3");
  const NodeSystem e({kPi, kPi / 2, 1.5 * kPi});
  const double expected = kPi + 0.15 * kPi * kPi;
  const ArcProfile prof = profile(p, e, s);
  double worst = 0;
  for (const ArcMax& a : prof.arcs) worst = std::max(worst, std::abs(a.m.value() - expected));
  c.expect(worst <= 1e-9, "arc maxima off by " + fmt(worst));
  const SolveReport r = solve_equioscillation(p, s);
  const double dist = node_dist(r.nodes, e);
  c.expect(r.status == SolveStatus::converged, "solver status " + std::string(to_string(r.status)));
  c.expect(dist <= 1e-7, "solution is " + fmt(dist) + " from e");
  c.note("max |m_j - (pi + 0.15 pi^2)| = " + fmt(worst));
  c.note("|w - e| = " + fmt(dist));
  return c.result();
}

Outcome criterion2() {
  Checker c;
  const double s2 = std::sqrt(2.0);
  const double x1 = kPi + (3 - 2 * s2) * kEps * kPi * kPi;
  const double x2 = (2 * s2 - 2) * kPi;
  const ArcProfile prof = profile(tent_parabola(), NodeSystem({x1, x2, 0.0}), Permutation::parse("3,2,1"));
  const double m0 = kPi + kEps * kPi * kPi * (14 * s2 - 19);
  const double m = kPi + kEps * kPi * kPi * (6 * s2 - 7);
  double worst = std::abs(prof.by_index(0).m.value() - m0);
  for (int j = 1; j <= 3; ++j) worst = std::max(worst, std::abs(prof.by_index(j).m.value() - m));
  double zerr = std::abs(prof.by_index(1).z - (kPi + x2 / 2));
  zerr = std::max(zerr, std::abs(prof.by_index(2).z - kPi));
  zerr = std::max(zerr, std::abs(prof.by_index(3).z - x2 / 2));
  c.expect(worst <= 1e-9, "maxima off by " + fmt(worst));
  c.expect(zerr <= 1e-9, "maximizers off by " + fmt(zerr));
  c.note("max maxima error " + fmt(worst));
  c.note("max maximizer error " + fmt(zerr));
  return c.result();
}

Outcome criterion3() {
  Checker c;
  const Problem p = smoothed_tent_parabola(50);
  const auto s = oracle::grid_minimax(p, Permutation::parse("2,1,3"), 120);
  const auto sp = oracle::grid_minimax(p, Permutation::parse("3,2,1"), 120);
  const double gap = s.value - sp.value;
  const double tol = s.tolerance + sp.tolerance;
  c.expect(gap > 10 * tol, "M(S) - M(S') = " + fmt(gap) + " vs tolerance " + fmt(tol));
  // The solver must agree with the oracle on both simplices.
  const double a = minimax(p, Permutation::parse("2,1,3")).objective;
  const double b = minimax(p, Permutation::parse("3,2,1")).objective;
  c.expect(std::abs(a - s.value) <= 1e-4 && std::abs(b - sp.value) <= 1e-4, "solver and oracle disagree");
  c.note("M(S) = " + fmt(s.value, 12) + ", M(S') = " + fmt(sp.value, 12));
  c.note("margin " + fmt(gap) + " > 10 x " + fmt(tol));
  return c.result();
}

Outcome criterion4() {
  Checker c;
  double worst_nodes = 0, worst_value = 0, worst_gap = 0, worst_grid = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    const Problem p = replicated(Kernel::log_sine(), n);
    const Permutation s = Permutation::identity(n);
    const double target = -static_cast<double>(n) * std::log(2.0);
    const SolveReport up = minimax(p, s);
    const SolveReport down = maximin(p, s);
    worst_nodes = std::max(worst_nodes, node_dist(up.nodes, equidistant(s)));
    worst_value = std::max(worst_value, std::abs(up.objective - target));
    worst_gap = std::max(worst_gap, std::abs(up.objective - down.objective));
    worst_grid = std::max(worst_grid, std::abs(oracle::grid_sup(p, equidistant(s), 1000000) - target));
    c.expect(up.status == SolveStatus::converged, "n=" + std::to_string(n) + " not converged");
  }
  c.expect(worst_nodes <= 1e-8, "nodes off by " + fmt(worst_nodes));
  c.expect(worst_value <= 1e-8, "M off by " + fmt(worst_value));
  c.expect(worst_gap <= 1e-8, "|M - m| = " + fmt(worst_gap));
  c.expect(worst_grid <= 1e-8, "grid_sup off by " + fmt(worst_grid));
  c.note("nodes " + fmt(worst_nodes) + ", M " + fmt(worst_value) + ", |M-m| " + fmt(worst_gap) + ", grid " +
         fmt(worst_grid));
  return c.result();
}

Outcome criterion5() {
  Checker c;
  double worst_nodes = 0, worst_norm = 0, worst_eq = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    const ExtremalPolynomial poly = solve_bojanov({-1, 1, std::vector<double>(n, 1.0)});
    std::vector<double> cheb;
    for (std::size_t k = n; k >= 1; --k) cheb.push_back(std::cos((2.0 * k - 1) * kPi / (2.0 * n)));
    worst_nodes = std::max(worst_nodes, max_abs_diff(poly.nodes, cheb));
    worst_norm = std::max(worst_norm, std::abs(poly.norm - std::pow(2.0, 1.0 - n)));
    double lo = 1e300, hi = -1e300;
    for (double sj : poly.alternation) {
      lo = std::min(lo, eval_gap(sj, poly));
      hi = std::max(hi, eval_gap(sj, poly));
    }
    worst_eq = std::max(worst_eq, hi - lo);
  }
  c.expect(worst_nodes <= 1e-7, "nodes off by " + fmt(worst_nodes));
  c.expect(worst_norm <= 1e-9, "norm off by " + fmt(worst_norm));
  c.expect(worst_eq <= 1e-7, "alternation spread " + fmt(worst_eq));
  c.note("nodes " + fmt(worst_nodes) + ", norm " + fmt(worst_norm) + ", |P(s_j)| spread " + fmt(worst_eq));
  return c.result();
}

Outcome criterion6() {
  Checker c;
  const ExtremalPolynomial poly = solve_bojanov({-1, 1, {1, 2}});
  c.expect(poly.interlaced, "nodes and alternation points do not interlace");
  double spread = 0;
  for (double sj : poly.alternation) spread = std::max(spread, std::abs(eval_gap(sj, poly) - poly.norm));
  c.expect(spread <= 1e-7, "equioscillation error " + fmt(spread));
  const auto grid = oracle::interval_grid_minimax(-1, 1, {1, 2}, 1e-3);
  const double dn = max_abs_diff(poly.nodes, grid.nodes);
  const double dv = std::abs(poly.norm - grid.norm);
  c.expect(dn <= 1e-4, "nodes differ from grid search by " + fmt(dn));
  c.expect(dv <= 1e-6, "norm differs from grid search by " + fmt(dv));
  c.note("norm " + fmt(poly.norm, 12) + ", nodes (" + fmt(poly.nodes[0], 9) + ", " + fmt(poly.nodes[1], 9) + ")");
  c.note("grid deltas " + fmt(dn) + " / " + fmt(dv));
  return c.result();
}

Outcome criterion7() {
  Checker c;
  const std::vector<Problem> mixes{
      Problem({Kernel::log_sine(), Kernel::riesz(2.0), Kernel::parabola(), Kernel::log_sine()}),
      Problem({Kernel::parabola(), Kernel::log_sine(), Kernel::riesz(2.0)}),
      Problem({Kernel::riesz(2.0), Kernel::parabola(), Kernel::parabola(), Kernel::log_sine(), Kernel::riesz(2.0)})};
  std::mt19937_64 rng(oracle::kDefaultSeed);
  const double h = 1e-6;
  double worst = 0;
  int checked = 0, skipped = 0;
  while (checked < 50 && skipped < 1000) {
    const Problem& p = mixes[static_cast<std::size_t>(checked + skipped) % mixes.size()];
    std::vector<int> perm(p.n());
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Permutation s(perm);
    const NodeSystem y = sample_simplex(s, rng);
    Eigen::MatrixXd j;
    try {
      j = jacobian_m(p, y, s);
    } catch (const JacobianUnavailable&) {
      ++skipped;
      continue;
    }
    ++checked;
    for (std::size_t r = 1; r <= p.n(); ++r) {
      std::vector<double> up(y.values().begin(), y.values().end()), dn = up;
      up[r - 1] += h;
      dn[r - 1] -= h;
      const auto mu = profile(p, NodeSystem(up), s).m_by_index();
      const auto md = profile(p, NodeSystem(dn), s).m_by_index();
      for (std::size_t k = 0; k <= p.n(); ++k) {
        const double fd = (mu[k] - md[k]) / (2 * h);
        worst = std::max(worst, std::abs(j(k, r - 1) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  c.expect(checked == 50, "only " + std::to_string(checked) + " points met the formula's preconditions");
  c.expect(worst <= 1e-5, "relative error " + fmt(worst));

  int solved = 0, mm_ok = 0;
  for (const Problem& p : mixes) {
    std::vector<int> perm(p.n());
    std::iota(perm.begin(), perm.end(), 1);
    do {
      const Permutation s(perm);
      const SolveReport r = solve_equioscillation(p, s);
      if (r.status != SolveStatus::converged) continue;
      ++solved;
      if (oracle::check_mmatrix(jacobian_delta(p, r.nodes, s), s).ok) ++mm_ok;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  c.expect(solved > 0 && mm_ok == solved, "M-matrix check passed at " + std::to_string(mm_ok) + " of " +
                                              std::to_string(solved) + " equioscillation points");
  c.note(std::to_string(checked) + " points (" + std::to_string(skipped) + " skipped, maximizer on an arc end)");
  c.note("max rel error " + fmt(worst));
  c.note("M-matrix " + std::to_string(mm_ok) + "/" + std::to_string(solved));
  return c.result();
}

Outcome criterion8() {
  Checker c;
  std::vector<Kernel> ks(4, Kernel::log_sine());
  ks[0] = Kernel::weighted(Kernel::log_sine(), 2.0);
  const Problem p(std::move(ks));
  const Permutation s = Permutation::identity(3);
  const SolveReport up = minimax(p, s);
  const auto sandwich = oracle::check_sandwich(p, s, up.objective, 200, 1e-9);
  c.expect(sandwich.violations.empty(), std::to_string(sandwich.violations.size()) + " sandwich violations");

  const SolveReport down = maximin(p, s);
  const auto mw = down.profile.m_by_index();
  std::mt19937_64 rng(oracle::kDefaultSeed + 1);
  int majorizing = 0;
  for (int i = 0; i < 100; ++i) {
    const NodeSystem x = sample_simplex(s, rng);
    if (node_dist(x, down.nodes) < 1e-9) continue;
    const auto mx = profile(p, x, s).m_by_index();
    double least = 1e300;
    for (std::size_t j = 0; j < mx.size(); ++j) least = std::min(least, mx[j] - mw[j]);
    if (!(least < -1e-12)) ++majorizing;
  }
  c.expect(majorizing == 0, std::to_string(majorizing) + " samples majorize the maximin point");

  const Problem ex = tent_parabola();
  const Permutation se = Permutation::parse("2,1,3");
  const SolveReport ue = minimax(ex, se);
  const auto witness = oracle::check_sandwich(ex, se, ue.objective, 100, 1e-9, oracle::kDefaultSeed,
                                              {NodeSystem({kPi, kPi / 2, 1.5 * kPi})});
  c.expect(!witness.violations.empty(), "no sandwich violation for the tent/parabola kernels");
  c.note("Fenton M = " + fmt(up.objective, 12) + ", m = " + fmt(down.objective, 12));
  c.note("tent/parabola witnesses " + std::to_string(witness.violations.size()));
  if (!witness.violations.empty()) c.note("margin " + fmt(witness.violations.front().margin));
  return c.result();
}

Outcome criterion9() {
  Checker c;
  const std::vector<int> levels{4, 16, 64, 256};
  std::mt19937_64 rng(oracle::kDefaultSeed);
  int probes = 0;
  double worst_ratio = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<Kernel> ks(n + 1, Kernel::tent());
      if (rep % 2) ks.back() = Kernel::weighted(Kernel::parabola(), kEps);
      const Problem p(std::move(ks));
      const Permutation s = Permutation::identity(n);
      const auto r = oracle::convergence_probe(p, ApproximantKind::sqrt_cusp, levels, sample_simplex(s, rng), s);
      ++probes;
      c.expect(r.within_bound, "bound exceeded for n=" + std::to_string(n));
      c.expect(r.decreasing, "deviation not decreasing for n=" + std::to_string(n));
      for (const auto& row : r.rows) worst_ratio = std::max(worst_ratio, row.deviation / row.bound);
    }
  }
  c.note(std::to_string(probes) + " probes, max deviation/bound " + fmt(worst_ratio));
  return c.result();
}

Outcome criterion10() {
  Checker c;
  const BojanovProblem q{-1, 1, {1, 2}};
  const DoubledResult d = solve_doubled_symmetric(q.exponents);
  c.expect(d.symmetry_residual <= 1e-8, "symmetry residual " + fmt(d.symmetry_residual));
  std::mt19937_64 rng(oracle::kDefaultSeed);
  std::uniform_real_distribution<double> u(0, kTwoPi);
  double worst = 0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, transference_identity_check(u(rng), q, d.nodes));
  c.expect(worst <= 1e-10, "transference residual " + fmt(worst));
  c.note("symmetry residual " + fmt(d.symmetry_residual) + ", max transference residual " + fmt(worst));
  return c.result();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "Tent/parabola equioscillation point", 1, criterion1},
      {2, "Tent/parabola boundary profile", 1, criterion2},
      {3, "Simplex dependence, smoothed tent/parabola", 300, criterion3},
      {4, "Equidistant optimum for log_sine", 10, criterion4},
      {5, "Chebyshev extremal polynomials", 30, criterion5},
      {6, "Extremal polynomial, exponents (1,2)", 120, criterion6},
      {7, "Jacobian and M-matrix structure", 60, criterion7},
      {8, "Sandwich and majorization", 120, criterion8},
      {9, "Approximant convergence probe", 60, criterion9},
      {10, "Doubled symmetric problem and transference", 60, criterion10},
  };
  int failed = 0;
  for (const Criterion& cr : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.limit_s) {
      o.pass = false;
      o.detail += " | runtime limit " + fmt(cr.limit_s) + " s exceeded";
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2d  %-45s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
