#include "equiosc/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "equiosc/errors.hpp"

namespace equiosc {

NodeSystem::NodeSystem(std::vector<double> y) : y_(std::move(y)) {
  for (double& v : y_) {
    if (!std::isfinite(v)) throw ValidationError("node angles must be finite");
    v = reduce_angle(v);
  }
}

Permutation::Permutation(std::vector<int> sigma) : sigma_(std::move(sigma)) {
  std::vector<bool> seen(sigma_.size() + 1, false);
  for (int v : sigma_) {
    if (v < 1 || v > static_cast<int>(sigma_.size()) || seen[static_cast<std::size_t>(v)]) {
      throw ValidationError("not a permutation of 1..n: " + to_string());
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  return Permutation(std::move(s));
}

Permutation Permutation::parse(std::string_view text) {
  std::vector<int> s;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t()");
    const auto last = item.find_last_not_of(" \t()");
    if (first == std::string::npos) continue;
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ValidationError("bad permutation literal '" + std::string(text) + "'");
    }
    if (used != item.size()) throw ValidationError("bad permutation literal '" + std::string(text) + "'");
    s.push_back(v);
  }
  return Permutation(std::move(s));
}

int Permutation::operator()(std::size_t k) const {
  if (k == 0) return 0;
  if (k == sigma_.size() + 1) return static_cast<int>(sigma_.size()) + 1;
  return sigma_.at(k - 1);
}

std::string Permutation::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < sigma_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sigma_[i]);
  }
  return s + ")";
}

const Arc& ArcPartition::by_index(int j) const {
  for (const auto& a : arcs) {
    if (a.index == j) return a;
  }
  throw ValidationError("no arc with index " + std::to_string(j));
}

double ArcPartition::total_length() const {
  double s = 0.0;
  for (const auto& a : arcs) s += a.length();
  return s;
}

std::vector<Arc> ArcPartition::cut_view(double c) const {
  c = reduce_angle(c);
  std::size_t first = 0;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].start <= c && c < arcs[k].end) {
      first = k;
      break;
    }
  }
  std::vector<Arc> out;
  out.reserve(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    Arc a = arcs[(first + i) % arcs.size()];
    if (i > 0 && a.start < c) {
      a.start += kTwoPi;
      a.end += kTwoPi;
    }
    out.push_back(a);
  }
  return out;
}

double torus_dist(double a, double b) {
  const double d = std::abs(reduce_angle(a) - reduce_angle(b));
  return std::min(d, kTwoPi - d);
}

double node_dist(const NodeSystem& x, const NodeSystem& y) {
  if (x.n() != y.n()) throw ValidationError("node systems have different sizes");
  double d = 0.0;
  for (std::size_t j = 1; j <= x.n(); ++j) d = std::max(d, torus_dist(x.node(j), y.node(j)));
  return d;
}

namespace {

constexpr std::size_t kMaxBoundaryPermutations = 5040;

struct Locator {
  const NodeSystem& y;
  double tol;
  std::vector<int> seq;
  std::vector<bool> used;
  std::vector<Permutation> found;

  std::vector<double> lifts(std::size_t j) const {
    const double v = y.node(j);
    if (v <= tol || v >= kTwoPi - tol) return {0.0, kTwoPi};
    return {v};
  }

  void run(double cur) {
    if (found.size() >= kMaxBoundaryPermutations) return;
    if (seq.size() == y.n()) {
      found.emplace_back(seq);
      return;
    }
    double lowest = kTwoPi + 1.0;
    for (std::size_t j = 1; j <= y.n(); ++j) {
      if (used[j]) continue;
      for (double l : lifts(j)) {
        if (l >= cur - tol) lowest = std::min(lowest, l);
      }
    }
    for (std::size_t j = 1; j <= y.n(); ++j) {
      if (used[j]) continue;
      for (double l : lifts(j)) {
        if (l < cur - tol || l > lowest + tol) continue;
        used[j] = true;
        seq.push_back(static_cast<int>(j));
        run(std::max(cur, l));
        seq.pop_back();
        used[j] = false;
        break;
      }
    }
  }
};

}  // namespace

SimplexLocation locate(const NodeSystem& y, double tol) {
  Locator loc{y, tol, {}, std::vector<bool>(y.n() + 1, false), {}};
  loc.run(0.0);
  SimplexLocation out;
  // Interior means the n+1 node values including the anchor are pairwise distinct.
  out.interior = true;
  for (std::size_t i = 0; i <= y.n() && out.interior; ++i) {
    for (std::size_t j = i + 1; j <= y.n(); ++j) {
      if (torus_dist(y.node(i), y.node(j)) <= tol) {
        out.interior = false;
        break;
      }
    }
  }
  out.permutations = std::move(loc.found);
  return out;
}

std::optional<std::vector<double>> lifted_positions(const NodeSystem& y, const Permutation& sigma,
                                                    double tol) {
  if (sigma.n() != y.n()) throw ValidationError("permutation size does not match node count");
  std::vector<double> v(y.n() + 2);
  v[0] = 0.0;
  for (std::size_t k = 1; k <= y.n(); ++k) {
    double p = y.node(static_cast<std::size_t>(sigma(k)));
    if (p < v[k - 1] - tol) {
      if (p > tol) return std::nullopt;
      p = kTwoPi;
    }
    v[k] = std::max(p, v[k - 1]);
  }
  v[y.n() + 1] = kTwoPi;
  if (v[y.n()] > kTwoPi) return std::nullopt;
  return v;
}

ArcPartition arcs(const NodeSystem& y, const Permutation& sigma, double tol) {
  const auto v = lifted_positions(y, sigma, tol);
  if (!v) {
    throw ValidationError("node system is not in the closure of the simplex " + sigma.to_string());
  }
  ArcPartition part;
  part.arcs.reserve(y.n() + 1);
  for (std::size_t k = 0; k <= y.n(); ++k) {
    part.arcs.push_back(Arc{sigma(k), (*v)[k], (*v)[k + 1]});
  }
  return part;
}

double admissible_cut(const NodeSystem& y) {
  std::vector<double> pts(y.values().begin(), y.values().end());
  pts.push_back(0.0);
  std::sort(pts.begin(), pts.end());
  double best_len = -1.0;
  double best_start = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double start = pts[i];
    const double end = i + 1 < pts.size() ? pts[i + 1] : pts[0] + kTwoPi;
    const double len = end - start;
    if (len > best_len + kAngleTol) {
      best_len = len;
      best_start = start;
    }
  }
  return reduce_angle(best_start + 0.5 * best_len);
}

std::vector<double> sort_nodes(std::vector<double> x) {
  std::stable_sort(x.begin(), x.end());
  return x;
}

NodeSystem equidistant(const Permutation& sigma) {
  const std::size_t n = sigma.n();
  std::vector<double> y(n);
  for (std::size_t k = 1; k <= n; ++k) {
    y[static_cast<std::size_t>(sigma(k)) - 1] = kTwoPi * static_cast<double>(k) / static_cast<double>(n + 1);
  }
  return NodeSystem(std::move(y));
}

NodeSystem sample_simplex(const Permutation& sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> pts(sigma.n());
  for (double& p : pts) {
    do {
      p = u(rng);
    } while (p == 0.0);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> y(sigma.n());
  for (std::size_t k = 1; k <= sigma.n(); ++k) y[static_cast<std::size_t>(sigma(k)) - 1] = pts[k - 1];
  return NodeSystem(std::move(y));
}

double min_gap(const NodeSystem& y, const Permutation& sigma) {
  const auto v = lifted_positions(y, sigma);
  if (!v) return 0.0;
  double g = kTwoPi;
  for (std::size_t k = 0; k + 1 < v->size(); ++k) g = std::min(g, (*v)[k + 1] - (*v)[k]);
  return g;
}

}  // namespace equiosc
