#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "nlsg/semigroup.hpp"

using namespace nlsg;

namespace {

OperatorSpec make_spec(Grid g, double p, BoundaryCondition bc = BoundaryCondition::dirichlet()) {
  OperatorSpec s;
  s.grid = std::move(g);
  s.p = p;
  s.bc = bc;
  return s;
}

GridFunction bump(const Grid& g, double center, double width, double height = 1.0) {
  return g.sample([=](const std::array<double, 2>& x) {
    const double r2 = ((x[0] - center) * (x[0] - center) + x[1] * x[1]) / (width * width);
    return r2 < 1.0 ? height * (1.0 - r2) * (1.0 - r2) : 0.0;
  });
}

GridFunction random_field(const Grid& g, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return g.sample([&](const std::array<double, 2>&) { return U(gen); });
}

}  // namespace

TEST(TimeGrid, Validation) {
  EXPECT_THROW((TimeGrid{0.0, 10}).validate(), DomainError);
  EXPECT_THROW((TimeGrid{1.0, 0}).validate(), DomainError);
  EXPECT_THROW((TimeGrid{1.0, 10, 1}).validate(), DomainError);
  EXPECT_DOUBLE_EQ((TimeGrid{1.0, 4}).dt(), 0.25);
}

TEST(Evolve, ZeroStaysZero) {
  auto spec = make_spec(Grid::line(30, -1, 1), 3);
  auto tr = evolve(spec, spec.grid.zeros(), {1.0, 20});
  ASSERT_EQ(tr.records.size(), 21u);
  for (const auto& r : tr.records) {
    EXPECT_EQ(r.l1, 0.0);
    EXPECT_EQ(r.linf, 0.0);
    EXPECT_EQ(r.support_margin, -1);
  }
}

TEST(Evolve, FirstOrderAgainstDenseExponential) {
  const int n = 20;
  auto spec = make_spec(Grid::line(n, 0, 1), 2);
  const double h = spec.grid.spacing(0), t = 0.02;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, i) = 2.0 / (h * h);
    if (i > 0) L(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < n) L(i, i + 1) = -1.0 / (h * h);
  }
  auto u0 = bump(spec.grid, 0.5, 0.3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  Eigen::VectorXd v0 = Eigen::Map<const Eigen::VectorXd>(u0.values().data(), n);
  Eigen::VectorXd exact =
      es.eigenvectors() * (-t * es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().transpose() * v0;
  std::vector<double> errs;
  for (long steps : {10, 20, 40, 80}) {
    auto tr = evolve(spec, u0, {t, steps});
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(tr.final_state.values().data(), n);
    errs.push_back((v - exact).norm());
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    EXPECT_GT(errs[i - 1] / errs[i], 1.5);
    EXPECT_LT(errs[i - 1] / errs[i], 3.0);
  }
}

TEST(Evolve, NeumannConservesMass) {
  for (double p : {1.5, 2.0, 3.0})
    for (double m : {1.0, 2.0}) {
      auto spec = make_spec(Grid::line(60, -1, 1), p, BoundaryCondition::neumann());
      spec.phi = PhiSpec::power(m);
      auto tr = evolve(spec, bump(spec.grid, 0.2, 0.5), {1.0, 50});
      const double m0 = tr.records.front().mass;
      for (const auto& r : tr.records) EXPECT_NEAR(r.mass, m0, 1e-8 * std::max(1.0, r.t)) << p << " " << m;
    }
}

TEST(Evolve, SemigroupProperty) {
  auto spec = make_spec(Grid::line(50, -1, 1), 3);
  ResolventSolver solver(spec);
  auto u0 = bump(spec.grid, 0.0, 0.6);
  auto whole = evolve(solver, u0, {0.5, 50});
  auto first = evolve(solver, u0, {0.2, 20});
  auto second = evolve(solver, first.final_state, {0.3, 30}, 0.2);
  EXPECT_NEAR(second.records.back().t, 0.5, 1e-14);
  const double tol = 1e-10 * 50;
  EXPECT_LT(lq_norm(whole.final_state - second.final_state, LebesgueIndex::infinity()), tol);
}

TEST(Evolve, NonExpansiveAndOrderPreserving) {
  std::mt19937_64 gen(3);
  for (double p : {1.5, 3.0}) {
    auto spec = make_spec(Grid::line(40, -1, 1), p);
    ResolventSolver solver(spec);
    for (int t = 0; t < 5; ++t) {
      auto u = random_field(spec.grid, gen);
      auto v = u + abs_value(random_field(spec.grid, gen));
      auto tu = evolve(solver, u, {0.1, 10}).final_state;
      auto tv = evolve(solver, v, {0.1, 10}).final_state;
      EXPECT_LE(lq_norm(tu - tv, 1.0), lq_norm(u - v, 1.0) * (1 + 1e-9));
      EXPECT_LE(lq_norm(tu - tv, LebesgueIndex::infinity()), lq_norm(u - v, LebesgueIndex::infinity()) * (1 + 1e-9));
      for (std::size_t k = 0; k < u.size(); ++k) EXPECT_LE(tu[k], tv[k] + 1e-9);
    }
  }
}

TEST(Evolve, PerturbedGrowthBound) {
  std::mt19937_64 gen(5);
  const double L = 0.7;
  auto spec = make_spec(Grid::line(40, -1, 1), 3);
  spec.perturbation = LipschitzF::sine(-L);
  ResolventSolver solver(spec);
  const TimeGrid tg{1.0, 20};
  const double bound = std::pow(1.0 - tg.dt() * L, -static_cast<double>(tg.steps));
  EXPECT_LE(std::exp(L * tg.t_end), bound);
  for (int t = 0; t < 5; ++t) {
    auto u = random_field(spec.grid, gen);
    auto v = random_field(spec.grid, gen);
    auto d = evolve(solver, u, tg).final_state - evolve(solver, v, tg).final_state;
    EXPECT_LE(lq_norm(d, 1.0), bound * lq_norm(u - v, 1.0) * (1 + 1e-9));
  }
}

TEST(Evolve, NormsAreNonIncreasing) {
  std::mt19937_64 gen(7);
  for (auto bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(), BoundaryCondition::robin(1.0)}) {
    auto spec = make_spec(Grid::rectangle(12, 10, -1, 1, -1, 1), 2.5, bc);
    spec.phi = PhiSpec::power(1.5);
    auto tr = evolve(spec, random_field(spec.grid, gen), {0.2, 20});
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      EXPECT_LE(tr.records[i].l1, tr.records[i - 1].l1 + 1e-9);
      EXPECT_LE(tr.records[i].l2, tr.records[i - 1].l2 + 1e-9);
      EXPECT_LE(tr.records[i].linf, tr.records[i - 1].linf + 1e-9);
    }
  }
}

TEST(Evolve, SnapshotsAreLimited) {
  auto spec = make_spec(Grid::line(20, -1, 1), 2);
  TimeGrid tg{1.0, 1000, 10};
  auto tr = evolve(spec, bump(spec.grid, 0, 0.5), tg);
  EXPECT_LE(tr.snapshots.size(), 10u);
  EXPECT_GE(tr.snapshots.size(), 5u);
  EXPECT_EQ(tr.snapshots.front().t, 0.0);
  EXPECT_NEAR(tr.snapshots.back().t, 1.0, 1e-12);
  for (std::size_t i = 1; i < tr.snapshots.size(); ++i) EXPECT_GT(tr.snapshots[i].t, tr.snapshots[i - 1].t);
}

TEST(Evolve, SupportMargin) {
  auto g = Grid::line(21, -1, 1);
  auto u = g.zeros();
  u[7] = 1.0;
  u[12] = -0.5;
  EXPECT_EQ(support_margin(g, u), 7);
  EXPECT_EQ(support_margin(g, g.zeros()), -1);
  u[20] = 1e-20;
  EXPECT_EQ(support_margin(g, u), 7);
  u[20] = 1e-3;
  EXPECT_EQ(support_margin(g, u), 0);
}

TEST(Probe, SingleStepAndZeroData) {
  auto spec = make_spec(Grid::line(30, -1, 1), 3);
  auto u0 = bump(spec.grid, 0, 0.5);
  auto probe = exponential_formula_probe(spec, u0, 0.1, {1, 2, 4});
  auto one = solve_resolvent({spec, 0.1, u0});
  for (std::size_t k = 0; k < u0.size(); ++k) EXPECT_EQ(probe[0].u[k], one.u[k]);
  EXPECT_TRUE(std::isnan(probe[0].cauchy_gap));
  auto zero = exponential_formula_probe(spec, spec.grid.zeros(), 0.1, {1, 2, 4});
  for (std::size_t i = 1; i < zero.size(); ++i) EXPECT_EQ(zero[i].cauchy_gap, 0.0);
  EXPECT_THROW(exponential_formula_probe(spec, u0, 0.1, {4, 2}), DomainError);
  EXPECT_THROW(exponential_formula_probe(spec, u0, 0.0, {1}), DomainError);
}

TEST(Probe, GapsHalve) {
  auto spec = make_spec(Grid::line(64, -1, 1), 2);
  auto u0 = bump(spec.grid, 0.1, 0.5);
  auto probe = exponential_formula_probe(spec, u0, 0.1, {8, 16, 32, 64});
  for (std::size_t i = 2; i < probe.size(); ++i) {
    const double ratio = probe[i - 1].cauchy_gap / probe[i].cauchy_gap;
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 3.0);
  }
}
