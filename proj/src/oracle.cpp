#include "equiosc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "equiosc/errors.hpp"
#include "equiosc/parallel.hpp"

namespace equiosc::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498949;

double eval_F(const Problem& p, const NodeSystem& y, double t) {
  double acc = 0.0;
  for (std::size_t j = 0; j <= p.n(); ++j) acc += p.kernels[j].eval(t - y.node(j)).value();
  return acc;
}

// Largest value of f seen by a golden-section search on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  double best = std::max(fc, fd);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      best = std::max(best, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      best = std::max(best, fd);
    }
  }
  return best;
}

// Max of a unimodal f on [s, e]: coarse sampling, then golden search around
// the best sample.
double unimodal_max(const std::function<double(double)>& f, double s, double e, int samples, double tol) {
  std::vector<double> t(static_cast<std::size_t>(samples) + 1);
  std::vector<double> v(t.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = s + (e - s) * static_cast<double>(i) / samples;
    v[i] = f(t[i]);
    if (v[i] > v[best]) best = i;
  }
  const double lo = t[best == 0 ? 0 : best - 1];
  const double hi = t[std::min(best + 1, t.size() - 1)];
  return std::max(v[best], golden_max(f, lo, hi, tol));
}

struct PatternResult {
  std::vector<double> x;
  double value = kInf;
  double variation = 0.0;
};

// Derivative-free minimization: compass directions {-1,0,1}^n plus seeded
// random directions, step halving until min_step.
PatternResult pattern_search(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                             double step, double min_step, std::uint64_t seed) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> dirs;
  const auto total = static_cast<std::size_t>(std::pow(3, n));
  for (std::size_t code = 1; code < total; ++code) {
    std::vector<double> d(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 3) d[i] = static_cast<double>(c % 3) - 1.0;
    dirs.push_back(std::move(d));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const std::size_t fixed = dirs.size();
  for (std::size_t k = 0; k < 4 * n + 4; ++k) {
    std::vector<double> d(n);
    double norm = 0.0;
    for (auto& di : d) {
      di = gauss(rng);
      norm = std::max(norm, std::abs(di));
    }
    for (auto& di : d) di /= norm;
    dirs.push_back(std::move(d));
  }
  PatternResult r{x, f(x), 0.0};
  int guard = 0;
  while (step >= min_step && guard++ < 20000) {
    double best = r.value;
    std::vector<double> best_x;
    for (const auto& d : dirs) {
      std::vector<double> cand = r.x;
      for (std::size_t i = 0; i < n; ++i) cand[i] += step * d[i];
      const double v = f(cand);
      if (v < best) {
        best = v;
        best_x = std::move(cand);
      }
    }
    if (!best_x.empty()) {
      r.x = std::move(best_x);
      r.value = best;
    } else {
      step *= 0.5;
    }
  }
  // Variation of the objective over the final stencil.
  for (std::size_t k = 0; k < fixed; ++k) {
    std::vector<double> cand = r.x;
    for (std::size_t i = 0; i < n; ++i) cand[i] += 2.0 * step * dirs[k][i];
    const double v = f(cand);
    if (std::isfinite(v)) r.variation = std::max(r.variation, std::abs(v - r.value));
  }
  return r;
}

using Components = std::function<std::vector<double>(const std::vector<double>&)>;

double max_of(const std::vector<double>& c) {
  return c.empty() ? kInf : *std::max_element(c.begin(), c.end());
}

// Minimizes max_i c_i(x). Compass search stalls on the kinks of a pointwise
// maximum, so each stage minimizes the smooth log-sum-exp surrogate
// (1/beta) log sum exp(beta c_i), with beta raised stage by stage.
PatternResult minimize_max(const Components& comps, std::vector<double> x, double step, double min_step,
                           std::uint64_t seed) {
  auto softmax = [&](double beta) {
    return [&comps, beta](const std::vector<double>& v) {
      const auto c = comps(v);
      const double top = max_of(c);
      if (!std::isfinite(top)) return top;
      double s = 0.0;
      for (double ci : c) s += std::exp(beta * (ci - top));
      return top + std::log(s) / beta;
    };
  };
  const auto hard = [&comps](const std::vector<double>& v) { return max_of(comps(v)); };
  PatternResult best{x, hard(x), 0.0};
  double beta = 10.0 / std::max(1e-12, step);
  while (true) {
    const PatternResult r = pattern_search(softmax(beta), x, step, std::max(min_step, 1e-3 / beta), seed++);
    x = r.x;
    const double v = hard(x);
    if (v <= best.value) best = {x, v, 0.0};
    if (beta >= 1e10) break;
    step = 10.0 / beta;
    beta *= 10.0;
  }
  PatternResult polish = pattern_search(hard, best.x, 1e-8, min_step, seed);
  if (polish.value <= best.value) best = polish;
  else best.variation = pattern_search(hard, best.x, min_step, min_step, seed).variation;
  return best;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double grid_sup(const Problem& p, const NodeSystem& y, std::size_t resolution) {
  const std::size_t n = p.n();
  if (y.n() != n) throw ValidationError("node count does not match the number of kernels");
  if (resolution < 10 * (n + 1)) {
    throw ValidationError("grid_sup needs resolution >= 10 (n + 1) = " + std::to_string(10 * (n + 1)));
  }
  const double h = kTwoPi / static_cast<double>(resolution);
  std::vector<double> v(resolution);
  for (std::size_t i = 0; i < resolution; ++i) v[i] = eval_F(p, y, h * static_cast<double>(i));
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double prev = v[(i + resolution - 1) % resolution];
    const double next = v[(i + 1) % resolution];
    if (v[i] >= prev && v[i] >= next && std::isfinite(v[i])) peaks.push_back(i);
  }
  double best = *std::max_element(v.begin(), v.end());
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
  if (peaks.size() > 32) peaks.resize(32);
  auto f = [&](double t) { return eval_F(p, y, t); };
  for (std::size_t i : peaks) {
    const double centre = h * static_cast<double>(i);
    best = std::max(best, golden_max(f, centre - h, centre + h, 1e-13));
  }
  return best;
}

std::vector<double> arc_maxima(const Problem& p, const NodeSystem& y, const Permutation& sigma) {
  const ArcPartition part = arcs(y, sigma);
  std::vector<double> m(part.arcs.size(), -kInf);
  auto f = [&](double t) { return eval_F(p, y, t); };
  for (const auto& a : part.arcs) {
    double best;
    if (a.length() <= kAngleTol) {
      best = f(a.start);
    } else {
      best = unimodal_max(f, a.start, a.end, 32, 1e-13 * std::max(1.0, a.length()));
    }
    m[static_cast<std::size_t>(a.index)] = best;
  }
  return m;
}

GridMinimaxResult grid_minimax(const Problem& p, const Permutation& sigma, std::size_t node_resolution) {
  const std::size_t n = p.n();
  if (n > 3) throw ValidationError("grid_minimax is limited to n <= 3");
  if (sigma.n() != n) throw ValidationError("permutation size does not match node count");
  if (node_resolution < 2) throw ValidationError("grid_minimax needs node_resolution >= 2");
  GridMinimaxResult out;
  if (n == 0) {
    out.value = out.coarse_value = grid_sup(p, NodeSystem(std::vector<double>{}), 100000);
    out.lattice_points = 1;
    return out;
  }
  const std::size_t R = node_resolution;
  const std::size_t factor = 10;
  const std::size_t T = factor * R;
  std::vector<std::vector<double>> table(n + 1, std::vector<double>(T));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i < T; ++i) {
      table[j][i] = p.kernels[j].eval(kTwoPi * static_cast<double>(i) / static_cast<double>(T)).value();
    }
  }

  // Lattice points 0 <= i_1 <= ... <= i_n <= R, node sigma(k) at 2pi i_k / R.
  std::vector<std::vector<std::size_t>> points;
  std::vector<std::size_t> idx(n, 0);
  std::function<void(std::size_t, std::size_t)> enumerate = [&](std::size_t k, std::size_t lo) {
    if (k == n) {
      points.push_back(idx);
      return;
    }
    for (std::size_t i = lo; i <= R; ++i) {
      idx[k] = i;
      enumerate(k + 1, i);
    }
  };
  enumerate(0, 0);
  out.lattice_points = points.size();

  std::vector<double> values(points.size());
  parallel_for(points.size(), [&](std::size_t q) {
    std::vector<std::size_t> shift(n + 1, 0);
    for (std::size_t k = 1; k <= n; ++k) {
      shift[static_cast<std::size_t>(sigma(k))] = (points[q][k - 1] % R) * factor;
    }
    double best = -kInf;
    for (std::size_t t = 0; t < T; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= n; ++j) acc += table[j][(t + T - shift[j]) % T];
      best = std::max(best, acc);
    }
    values[q] = best;
  });

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min<std::size_t>(6, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] < values[b] || (values[a] == values[b] && a < b); });
  out.coarse_value = values[order[0]];

  // Arc maxima on the closed simplex; a single +inf outside it.
  auto comps = [&](const std::vector<double>& v) {
    std::vector<double> y(n);
    for (std::size_t k = 1; k <= n; ++k) {
      if (v[k - 1] < 0.0 || v[k - 1] > kTwoPi) return std::vector<double>{kInf};
      if (k > 1 && v[k - 1] < v[k - 2]) return std::vector<double>{kInf};
      y[static_cast<std::size_t>(sigma(k)) - 1] = v[k - 1];
    }
    const NodeSystem ys(y);
    if (!lifted_positions(ys, sigma)) return std::vector<double>{kInf};
    return arc_maxima(p, ys, sigma);
  };

  std::vector<PatternResult> refined(keep);
  parallel_for(keep, [&](std::size_t c) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = kTwoPi * static_cast<double>(points[order[c]][k]) / static_cast<double>(R);
    }
    refined[c] = minimize_max(comps, v, kTwoPi / static_cast<double>(R), 1e-11, kDefaultSeed + 100 * c);
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < keep; ++c) {
    if (refined[c].value < refined[best].value) best = c;
  }
  std::vector<double> y(n);
  for (std::size_t k = 1; k <= n; ++k) y[static_cast<std::size_t>(sigma(k)) - 1] = refined[best].x[k - 1];
  out.value = refined[best].value;
  out.argmin = NodeSystem(y);
  out.tolerance = std::max(1e-10, static_cast<double>(n) * refined[best].variation);
  return out;
}

SandwichReport check_sandwich(const Problem& p, const Permutation& sigma, double reference, std::size_t samples,
                              double tol, std::uint64_t seed, const std::vector<NodeSystem>& extra) {
  SandwichReport rep;
  rep.reference = reference;
  rep.samples = samples;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<NodeSystem> pts;
  for (std::size_t s = 0; s < samples; ++s) pts.push_back(sample_simplex(sigma, rng));
  pts.insert(pts.end(), extra.begin(), extra.end());
  std::vector<std::vector<double>> m(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { m[i] = arc_maxima(p, pts[i], sigma); });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double lo = *std::min_element(m[i].begin(), m[i].end());
    const double hi = *std::max_element(m[i].begin(), m[i].end());
    if (lo > reference + tol) rep.violations.push_back({"lower", pts[i], lo, lo - reference});
    if (hi < reference - tol) rep.violations.push_back({"upper", pts[i], hi, reference - hi});
  }
  return rep;
}

std::string_view to_string(Majorization m) {
  switch (m) {
    case Majorization::strict:
      return "strict";
    case Majorization::weak:
      return "weak";
    case Majorization::none:
      return "none";
  }
  return "?";
}

Majorization check_majorization(const std::vector<double>& mx, const std::vector<double>& my, double tol) {
  if (mx.size() != my.size()) throw ValidationError("majorization needs equally sized profiles");
  bool strict = true;
  for (std::size_t j = 0; j < mx.size(); ++j) {
    if (mx[j] < my[j] - tol) return Majorization::none;
    if (!(mx[j] > my[j] + tol)) strict = false;
  }
  return strict ? Majorization::strict : Majorization::weak;
}

Majorization check_majorization(const ArcProfile& x, const ArcProfile& y, double tol) {
  if (!(x.sigma == y.sigma)) throw ValidationError("majorization needs profiles of the same simplex");
  return check_majorization(x.m_by_index(), y.m_by_index(), tol);
}

MMatrixReport check_mmatrix(const Eigen::MatrixXd& j) {
  MMatrixReport rep;
  if (j.rows() != j.cols()) {
    rep.ok = false;
    rep.diagnostics.push_back("matrix is not square");
    return rep;
  }
  const Eigen::MatrixXd a = -j;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.diagnostics.push_back(std::move(msg));
  };
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double v = a(r, c);
      if (!std::isfinite(v)) {
        fail("entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not finite");
      } else if (r == c && !(v > 0.0)) {
        fail("diagonal entry (" + std::to_string(r) + "," + std::to_string(c) + ") = " + std::to_string(v) + " is not positive");
      } else if (r != c && !(v < 0.0)) {
        fail("off-diagonal entry (" + std::to_string(r) + "," + std::to_string(c) + ") = " + std::to_string(v) + " is not negative");
      }
    }
  }
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double s = a.col(c).sum();
    if (!(s > 0.0)) fail("column sum " + std::to_string(c) + " = " + std::to_string(s) + " is not positive");
  }
  return rep;
}

MMatrixReport check_mmatrix(const Eigen::MatrixXd& j, const Permutation& sigma) {
  if (static_cast<std::size_t>(j.cols()) != sigma.n()) {
    return MMatrixReport{false, {"permutation size does not match the matrix"}};
  }
  Eigen::MatrixXd ordered(j.rows(), j.cols());
  for (std::size_t k = 1; k <= sigma.n(); ++k) {
    ordered.col(static_cast<Eigen::Index>(k) - 1) = j.col(sigma(k) - 1);
  }
  return check_mmatrix(ordered);
}

ProbeReport convergence_probe(const Problem& p, ApproximantKind kind, const std::vector<int>& levels,
                              const NodeSystem& y, const Permutation& sigma) {
  ProbeReport rep;
  const auto base = sorted(arc_maxima(p, y, sigma));
  const double count = static_cast<double>(p.n() + 1);
  double prev = kInf;
  for (int level : levels) {
    if (level < 1) throw ValidationError("approximant level must be >= 1");
    std::vector<Kernel> ks;
    for (const auto& k : p.kernels) ks.push_back(approximant(k, level, kind));
    const auto m = sorted(arc_maxima(Problem(std::move(ks)), y, sigma));
    double dev = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double d = (std::isinf(m[j]) && std::isinf(base[j]) && m[j] == base[j]) ? 0.0 : std::abs(m[j] - base[j]);
      dev = std::max(dev, d);
    }
    const ProbeRow row{level, dev, count / level};
    if (row.deviation > row.bound + 1e-12) rep.within_bound = false;
    if (row.deviation > prev + 1e-12) rep.decreasing = false;
    prev = row.deviation;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

// log P at a, at b, and its maximum on each piece between consecutive roots.
std::vector<double> interval_log_components(double a, double b, const std::vector<double>& nodes,
                                            const std::vector<double>& nu) {
  if (nodes.size() != nu.size()) throw ValidationError("one exponent per node required");
  auto logp = [&](double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) acc += nu[j] * std::log(std::abs(x - nodes[j]));
    return acc;
  };
  std::vector<double> cuts{a};
  for (double x : sorted(nodes)) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  // Outside the roots P is monotone; between consecutive roots log P is concave.
  std::vector<double> out{logp(a), logp(b)};
  for (std::size_t i = 1; i + 2 < cuts.size(); ++i) {
    if (cuts[i] < cuts[i + 1]) out.push_back(golden_max(logp, cuts[i], cuts[i + 1], 1e-14 * std::max(1.0, b - a)));
  }
  return out;
}

}  // namespace

double interval_sup(double a, double b, const std::vector<double>& nodes, const std::vector<double>& nu) {
  return std::exp(max_of(interval_log_components(a, b, nodes, nu)));
}

IntervalSearchResult interval_grid_minimax(double a, double b, const std::vector<double>& nu, double step) {
  if (nu.size() != 2) throw ValidationError("interval_grid_minimax supports two exponents");
  if (!(a < b) || !(step > 0.0)) throw ValidationError("need a < b and a positive step");
  const auto N = static_cast<std::size_t>(std::floor((b - a) / step));
  auto coarse_sup = [&](double x1, double x2) {
    auto logp = [&](double x) { return nu[0] * std::log(std::abs(x - x1)) + nu[1] * std::log(std::abs(x - x2)); };
    double best = std::max(logp(a), logp(b));
    best = std::max(best, golden_max(logp, x1, x2, 1e-7 * (b - a)));
    return best;
  };
  std::vector<double> row_best(N, kInf);
  std::vector<std::size_t> row_arg(N, 0);
  parallel_for(N, [&](std::size_t i) {
    if (i == 0) return;
    const double x1 = a + step * static_cast<double>(i);
    for (std::size_t j = i + 1; j < N; ++j) {
      const double x2 = a + step * static_cast<double>(j);
      const double v = coarse_sup(x1, x2);
      if (v < row_best[i]) {
        row_best[i] = v;
        row_arg[i] = j;
      }
    }
  });
  std::vector<std::size_t> rows(N);
  std::iota(rows.begin(), rows.end(), 0);
  const std::size_t keep = std::min<std::size_t>(4, N);
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(keep), rows.end(),
                    [&](std::size_t x, std::size_t y) { return row_best[x] < row_best[y] || (row_best[x] == row_best[y] && x < y); });
  auto comps = [&](const std::vector<double>& x) {
    if (!(a < x[0] && x[0] < x[1] && x[1] < b)) return std::vector<double>{kInf};
    return interval_log_components(a, b, x, nu);
  };
  IntervalSearchResult out;
  out.norm = kInf;
  for (std::size_t c = 0; c < keep; ++c) {
    const std::size_t i = rows[c];
    if (!std::isfinite(row_best[i])) continue;
    std::vector<double> x0{a + step * static_cast<double>(i), a + step * static_cast<double>(row_arg[i])};
    const PatternResult r = minimize_max(comps, x0, step, 1e-13, kDefaultSeed + 100 * c);
    const double norm = std::exp(r.value);
    if (norm < out.norm) {
      out.norm = norm;
      out.nodes = r.x;
      out.tolerance = std::max(1e-14, 2.0 * norm * r.variation);
    }
  }
  return out;
}

}  // namespace equiosc::oracle
