#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equiosc/errors.hpp"
#include "equiosc/oracle.hpp"
#include "equiosc/solver.hpp"

using namespace equiosc;

namespace {

Problem replicated(const Kernel& k, std::size_t n) { return Problem(std::vector<Kernel>(n + 1, k)); }

Problem tent_parabola() {
  const Kernel q = Kernel::weighted(Kernel::parabola(), 0.1);
  return Problem({Kernel::tent(), Kernel::tent(), q, q});
}

Problem fenton(std::size_t n) {
  std::vector<Kernel> ks(n + 1, Kernel::log_sine());
  ks[0] = Kernel::weighted(Kernel::log_sine(), 2.0);
  return Problem(std::move(ks));
}

bool has_flag(const SolveReport& r, const std::string& f) {
  return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end();
}

}  // namespace

TEST(Solver, Hypotheses) {
  EXPECT_TRUE(minimax_hypotheses_hold(replicated(Kernel::log_sine(), 3)));
  EXPECT_TRUE(minimax_hypotheses_hold(Problem({Kernel::parabola(), Kernel::log_sine()})));
  EXPECT_FALSE(minimax_hypotheses_hold(tent_parabola()));
}

TEST(Solver, EquidistantForReplicatedLogSine) {
  const Problem p = replicated(Kernel::log_sine(), 2);
  const SolveReport r = solve_equioscillation(p, Permutation::identity(2));
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_NEAR(r.nodes.node(1), kTwoPi / 3, 1e-9);
  EXPECT_NEAR(r.nodes.node(2), 2 * kTwoPi / 3, 1e-9);
  EXPECT_NEAR(r.objective, -2 * std::log(2.0), 1e-10);
}

TEST(Solver, TentParabolaFromEquidistant) {
  const SolveReport r = solve_equioscillation(tent_parabola(), Permutation::parse("2,1,3"));
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(node_dist(r.nodes, NodeSystem({kPi, kPi / 2, 1.5 * kPi})), 1e-7);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(Solver, EvenPairGivesMidpoint) {
  for (const Kernel& k : {Kernel::log_sine(), Kernel::parabola(), Kernel::riesz(1.0)}) {
    const Problem p = replicated(k, 1);
    const SolveReport e = solve_equioscillation(p, Permutation::identity(1));
    EXPECT_NEAR(e.nodes.node(1), kPi, 1e-9) << k.canonical();
    const SolveReport m = maximin(p, Permutation::identity(1));
    EXPECT_NEAR(m.nodes.node(1), kPi, 1e-7) << k.canonical();
  }
}

TEST(Solver, EquioscillationCertificate) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::riesz(2.0), Kernel::weighted(Kernel::log_sine(), 3.0),
                             Kernel::parabola()});
  SolveOptions o;
  for (const char* s : {"1,2,3", "2,3,1", "3,1,2"}) {
    const SolveReport r = solve_equioscillation(p, Permutation::parse(s), o);
    ASSERT_EQ(r.status, SolveStatus::converged) << s;
    EXPECT_LE(r.profile.m_bar.value() - r.profile.m_under.value(), 2 * o.tol_residual);
    EXPECT_TRUE(locate(r.nodes).interior);
  }
}

TEST(Solver, MultistartUniqueness) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::weighted(Kernel::log_sine(), 2.0),
                             Kernel::weighted(Kernel::log_sine(), 0.5), Kernel::log_sine()});
  const Permutation s = Permutation::parse("3,1,2");
  std::mt19937_64 rng(31);
  std::vector<NodeSystem> sols;
  for (int i = 0; i < 10; ++i) {
    SolveOptions o;
    o.start = StartKind::user;
    o.start_nodes = sample_simplex(s, rng);
    const SolveReport r = solve_equioscillation(p, s, o);
    ASSERT_EQ(r.status, SolveStatus::converged);
    sols.push_back(r.nodes);
  }
  for (std::size_t i = 1; i < sols.size(); ++i) EXPECT_LT(node_dist(sols[0], sols[i]), 1e-7);
}

TEST(Solver, HksMinimaxEqualsMaximin) {
  for (std::size_t n = 2; n <= 4; ++n) {
    const Problem p = replicated(Kernel::log_sine(), n);
    const Permutation s = Permutation::identity(n);
    const SolveReport up = minimax(p, s);
    const SolveReport down = maximin(p, s);
    EXPECT_EQ(up.status, SolveStatus::converged);
    EXPECT_NEAR(up.objective, -static_cast<double>(n) * std::log(2.0), 1e-8);
    EXPECT_NEAR(down.objective, up.objective, 1e-8);
    EXPECT_LT(node_dist(up.nodes, equidistant(s)), 1e-8);
    EXPECT_LT(node_dist(down.nodes, equidistant(s)), 1e-7);
  }
}

TEST(Solver, FentonMinimaxMatchesGridOracle) {
  const Problem p = fenton(2);
  const Permutation s = Permutation::identity(2);
  const SolveReport r = minimax(p, s);
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_FALSE(has_flag(r, "non_minimal_equioscillation"));
  const oracle::GridMinimaxResult g = oracle::grid_minimax(p, s, 60);
  EXPECT_NEAR(r.objective, g.value, 1e-4);
  EXPECT_LT(node_dist(r.nodes, g.argmin), 1e-3);
}

TEST(Solver, TentParabolaMaximinExceedsMinimax) {
  const Problem p = tent_parabola();
  const Permutation s = Permutation::parse("2,1,3");
  const double me = kPi + 0.15 * kPi * kPi;
  const SolveReport down = maximin(p, s);
  const SolveReport up = minimax(p, s);
  EXPECT_GE(down.objective, me - 1e-9);
  EXPECT_LT(up.objective, me - 1e-3);
  EXPECT_NE(up.status, SolveStatus::converged);
}

TEST(Solver, MinimaxGlobalSymmetric) {
  const Problem p = replicated(Kernel::log_sine(), 3);
  const GlobalReport g = minimax_global(p);
  EXPECT_EQ(g.table.size(), 6u);
  for (const SimplexEntry& e : g.table) EXPECT_NEAR(e.value, -3 * std::log(2.0), 1e-8);
  EXPECT_NEAR(g.best.objective, -3 * std::log(2.0), 1e-8);
}

TEST(Solver, MinimaxGlobalSingleNode) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::weighted(Kernel::log_sine(), 2.0)});
  const GlobalReport g = minimax_global(p);
  ASSERT_EQ(g.table.size(), 1u);
  EXPECT_NEAR(g.best.objective, minimax(p, Permutation::identity(1)).objective, 1e-12);
}

TEST(Solver, MinimaxGlobalCap) {
  SolveOptions o;
  o.max_global_n = 2;
  EXPECT_THROW(minimax_global(replicated(Kernel::log_sine(), 3), o), ValidationError);
}

TEST(Solver, DescentDirectionSingleArc) {
  const Problem p = replicated(Kernel::log_sine(), 1);
  const NodeSystem y({2.0});
  const ArcProfile prof = profile(p, y, Permutation::identity(1));
  const int active = prof.arcs[0].m > prof.arcs[1].m ? 0 : 1;
  const Eigen::VectorXd a = descent_direction(p, y, prof, {active});
  ASSERT_EQ(a.size(), 1);
  EXPECT_NEAR(std::abs(a(0)), 1.0, 1e-12);
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const NodeSystem z({2.0 + h * a(0)});
    EXPECT_LT(profile(p, z, Permutation::identity(1)).by_index(active).m, prof.by_index(active).m);
  }
}

TEST(Solver, DescentDirectionDecreasesActiveArcs) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::parabola(), Kernel::riesz(1.0), Kernel::log_sine()});
  const Permutation s = Permutation::identity(3);
  std::mt19937_64 rng(37);
  int tested = 0;
  for (int i = 0; i < 20; ++i) {
    const NodeSystem y = sample_simplex(s, rng);
    const ArcProfile prof = profile(p, y, s);
    std::vector<std::pair<double, int>> order;
    for (const ArcMax& a : prof.arcs) order.push_back({-a.m.value(), a.index});
    std::sort(order.begin(), order.end());
    const std::vector<int> active{order[0].second, order[1].second};
    Eigen::VectorXd a;
    try {
      a = descent_direction(p, y, prof, active);
    } catch (const InfeasibleDirection&) {
      continue;
    }
    ++tested;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      std::vector<double> z(y.values().begin(), y.values().end());
      for (int r = 0; r < 3; ++r) z[r] += h * a(r);
      const auto loc = lifted_positions(NodeSystem(z), s);
      if (!loc) continue;
      const ArcProfile moved = profile(p, NodeSystem(z), s);
      for (int j : active) EXPECT_LT(moved.by_index(j).m, prof.by_index(j).m) << "h=" << h;
    }
  }
  EXPECT_GT(tested, 10);
}

TEST(Solver, DescentDirectionInfeasibleAtEquioscillation) {
  const Problem p = tent_parabola();
  const NodeSystem e({kPi, kPi / 2, 1.5 * kPi});
  const ArcProfile prof = profile(p, e, Permutation::parse("2,1,3"));
  EXPECT_THROW(descent_direction(p, e, prof, {0, 1, 2, 3}), InfeasibleDirection);
}

TEST(Solver, PullApart) {
  const Problem equal = replicated(Kernel::log_sine(), 2);
  const NodeSystem y({kPi, kPi});
  const NodeSystem z = pull_apart(equal, y, 1, 2, 0.1);
  EXPECT_NEAR(z.node(1), kPi - 0.1, 1e-15);
  EXPECT_NEAR(z.node(2), kPi + 0.1, 1e-15);
  EXPECT_EQ(pull_apart(equal, y, 1, 2, 0.0), y);

  const Problem weighted({Kernel::log_sine(), Kernel::weighted(Kernel::log_sine(), 2.0), Kernel::log_sine()});
  const NodeSystem w = pull_apart(weighted, y, 1, 2, 0.1);
  EXPECT_NEAR(kPi - w.node(1), 0.05, 1e-15);
  EXPECT_NEAR(w.node(2) - kPi, 0.1, 1e-15);
}

TEST(Solver, FiniteDifferenceJacobianMatchesAnalytic) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::riesz(2.0), Kernel::log_sine()});
  const NodeSystem y({1.5, 4.0});
  const Permutation s = Permutation::identity(2);
  const Eigen::MatrixXd a = jacobian_m(p, y, s);
  const Eigen::MatrixXd f = jacobian_m_fd(p, y, s);
  EXPECT_LT((a - f).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Solver, MMatrixAtEquioscillation) {
  const Problem p = Problem({Kernel::log_sine(), Kernel::riesz(2.0), Kernel::parabola(), Kernel::log_sine()});
  const Permutation s = Permutation::parse("2,3,1");
  const SolveReport r = solve_equioscillation(p, s);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_TRUE(oracle::check_mmatrix(jacobian_delta(p, r.nodes, s), s).ok);
}

TEST(Solver, UserStartValidated) {
  SolveOptions o;
  o.start = StartKind::user;
  o.start_nodes = NodeSystem({1.0, 2.0});
  EXPECT_THROW(solve_equioscillation(replicated(Kernel::log_sine(), 2), Permutation::parse("2,1"), o),
               ValidationError);
}

TEST(Solver, DeterministicGivenSeed) {
  const Problem p = tent_parabola();
  const SolveReport a = minimax(p, Permutation::parse("3,2,1"));
  const SolveReport b = minimax(p, Permutation::parse("3,2,1"));
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.objective, b.objective);
}
