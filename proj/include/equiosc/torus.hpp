#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equiosc/kernel.hpp"

namespace equiosc {

/// Default absolute tolerance for angle comparisons.
inline constexpr double kAngleTol = 1e-12;

/// Free nodes y_1..y_n in [0, 2pi). The anchor y_0 = 0 is implicit.
class NodeSystem {
 public:
  NodeSystem() = default;
  explicit NodeSystem(std::vector<double> y);

  std::size_t n() const { return y_.size(); }
  /// y_j for j in 0..n (y_0 = 0).
  double node(std::size_t j) const { return j == 0 ? 0.0 : y_[j - 1]; }
  std::span<const double> values() const { return y_; }

  friend bool operator==(const NodeSystem&, const NodeSystem&) = default;

 private:
  std::vector<double> y_;
};

/// A bijection sigma on {1..n}, extended by sigma(0) = 0 and sigma(n+1) = n+1.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> sigma);
  static Permutation identity(std::size_t n);
  /// Parses "2,1,3".
  static Permutation parse(std::string_view text);

  std::size_t n() const { return sigma_.size(); }
  /// sigma(k) for k in 0..n+1.
  int operator()(std::size_t k) const;
  const std::vector<int>& values() const { return sigma_; }
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> sigma_;
};

struct Arc {
  int index = 0;  // j = sigma(k)
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

/// The n+1 arcs I_{sigma,sigma(k)} = [y_sigma(k), y_sigma(k+1)], listed in
/// counterclockwise (k) order starting at the anchor 0.
struct ArcPartition {
  std::vector<Arc> arcs;
  std::optional<double> cut;

  const Arc& by_index(int j) const;
  double total_length() const;
  /// Arcs re-listed from the one containing c; later arcs are lifted so that
  /// their endpoints lie in [c, c + 2pi]. Entry 0 is the arc containing c.
  std::vector<Arc> cut_view(double c) const;
};

struct SimplexLocation {
  bool interior = false;
  /// Exactly one permutation when interior; every compatible one otherwise.
  std::vector<Permutation> permutations;
};

double torus_dist(double a, double b);
double node_dist(const NodeSystem& x, const NodeSystem& y);

SimplexLocation locate(const NodeSystem& y, double tol = kAngleTol);

/// Positions 0 = v_0 <= v_1 <= ... <= v_n <= v_{n+1} = 2pi of the nodes in
/// sigma order; a node at 0 placed after others is read as 2pi. Returns
/// nullopt when y is not in the closure of S_sigma.
std::optional<std::vector<double>> lifted_positions(const NodeSystem& y, const Permutation& sigma,
                                                    double tol = kAngleTol);

ArcPartition arcs(const NodeSystem& y, const Permutation& sigma, double tol = kAngleTol);

/// Midpoint of a longest arc cut out by y and 0; ties go to the smallest start.
double admissible_cut(const NodeSystem& y);

std::vector<double> sort_nodes(std::vector<double> x);

/// Equally spaced nodes ordered by sigma: y_sigma(k) = 2pi k / (n+1).
NodeSystem equidistant(const Permutation& sigma);

/// Uniform random point of the open simplex S_sigma.
NodeSystem sample_simplex(const Permutation& sigma, std::mt19937_64& rng);

/// Smallest gap between consecutive positions of lifted_positions.
double min_gap(const NodeSystem& y, const Permutation& sigma);

}  // namespace equiosc
