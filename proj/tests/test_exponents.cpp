#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlsg/exponents.hpp"

using namespace nlsg;

namespace {

GNParams gn(double q, double sigma, double rho) {
  GNParams p;
  p.q = q;
  p.sigma = sigma;
  p.rho = rho;
  return p;
}

constexpr double kTight = 1e-12;

}  // namespace

TEST(SmoothingExponents, Examples) {
  auto a = smoothing_exponents(gn(2, 3, 0));
  EXPECT_NEAR(a.alpha, 1.0 / 3, kTight);
  EXPECT_NEAR(a.beta, 5.0 / 3, kTight);
  EXPECT_NEAR(a.gamma, 2.0 / 3, kTight);
  auto b = smoothing_exponents(gn(1, 1, 0));
  EXPECT_NEAR(b.alpha, 1.0, kTight);
  EXPECT_NEAR(b.beta, 2.0, kTight);
  EXPECT_NEAR(b.gamma, 1.0, kTight);
  auto c = smoothing_exponents(gn(2, 2, 0));
  EXPECT_NEAR(c.alpha, 0.5, kTight);
  EXPECT_NEAR(c.beta, 2.0, kTight);
  EXPECT_NEAR(c.gamma, 1.0, kTight);
}

TEST(SmoothingExponents, RejectsBadParameters) {
  EXPECT_THROW(smoothing_exponents(gn(2, 0, 0)), DomainError);
  EXPECT_THROW(smoothing_exponents(gn(0.5, 2, 0)), DomainError);
  EXPECT_THROW(smoothing_exponents(gn(2, 2, -1)), DomainError);
}

TEST(ExtrapolateToInfinity, Example) {
  auto r = extrapolate_to_infinity(2, LebesgueIndex::finite(6), 1, 0.5, 2, 2);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.alpha_star, 0.25, kTight);
  EXPECT_NEAR(r.beta_star, 1.5, kTight);
  EXPECT_NEAR(r.gamma_star, 1.0, kTight);
}

TEST(ExtrapolateToInfinity, GammaRMustExceedQ) {
  auto small = extrapolate_to_infinity(2, LebesgueIndex::finite(1), 1, 0.5, 2, 2);
  EXPECT_FALSE(small.valid);
  EXPECT_EQ(first_failed(small.conditions), "gamma_r_gt_q");
  // gamma r == q exactly is also excluded
  auto edge = extrapolate_to_infinity(2, LebesgueIndex::finite(6), 1.0 / 3, 0.5, 4.0 / 3, 6);
  EXPECT_FALSE(edge.valid);
  EXPECT_EQ(first_failed(edge.conditions), "gamma_r_gt_q");
}

TEST(ExtrapolateToInfinity, InfiniteRIsRejected) {
  auto r = extrapolate_to_infinity(2, LebesgueIndex::infinity(), 1, 0.5, 2, 2);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(first_failed(r.conditions), "r_finite");
}

TEST(ExtrapolateToInfinity, BetaMatchesUnitShiftForm) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const double q = 1.0 + 3.0 * U(gen);
    const double gamma = 0.3 + 2.0 * U(gen);
    const double r = q / gamma * (1.1 + 3.0 * U(gen));
    const double m0 = q / gamma * (1.0 + 2.0 * U(gen));
    auto e = extrapolate_to_infinity(q, LebesgueIndex::finite(r), gamma, 0.5, gamma + 1.0, m0);
    if (!e.valid) continue;
    ++checked;
    const double ref = beta_star_for_unit_shift(q, r, gamma, m0);
    EXPECT_NEAR(e.beta_star, ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
  EXPECT_GT(checked, 50);
}

TEST(ExtrapolateToS, HeatKernelExample) {
  auto r = extrapolate_to_s(2, LebesgueIndex::infinity(), 1, 0.75, 2, 1);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.theta_s, 0.5, kTight);
  EXPECT_NEAR(r.alpha_s, 1.5, kTight);
  EXPECT_NEAR(r.gamma_s, 1.0, kTight);
  EXPECT_NEAR(r.beta_s, 3.0, kTight);
  ASSERT_TRUE(r.constant.has_value());
  EXPECT_NEAR(*r.constant, 8.0, 1e-12);
}

TEST(ExtrapolateToS, FiniteR) {
  auto r = extrapolate_to_s(4, LebesgueIndex::finite(8), 0.5, 1, 2, 2);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.theta_s, 1.0 / 3, kTight);
  EXPECT_NEAR(r.alpha_s, 1.5, kTight);
}

TEST(ExtrapolateToS, SMustBeBelowQ) {
  auto r = extrapolate_to_s(2, LebesgueIndex::infinity(), 1, 0.75, 2, 2);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.failed_condition(), "s_lt_q");
}

TEST(IterationSequence, PowersOfTwo) {
  auto s = iteration_sequence(2, 1, 1, 1, 5);
  const std::vector<double> want{1, 2, 4, 8, 16, 32};
  ASSERT_EQ(s.values.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_DOUBLE_EQ(s.values[k], want[k]);
    EXPECT_NEAR(s.closed_form[k], want[k], 1e-12);
  }
  EXPECT_TRUE(s.monotone);
  EXPECT_NEAR(s.limit_ratio, 1.0, kTight);
}

TEST(IterationSequence, SeedConditionFails) {
  auto s = iteration_sequence(2, 2, 3, 1, 3);
  EXPECT_DOUBLE_EQ(s.values[1], 0.0);
  EXPECT_FALSE(s.monotone);
  for (std::size_t k = 1; k < s.values.size(); ++k) EXPECT_LT(s.values[k], s.values[k - 1]);
}

TEST(IterationSequence, KappaMustExceedOne) {
  EXPECT_THROW(iteration_sequence(1, 1, 1, 1, 3), DomainError);
  EXPECT_THROW(iteration_sequence(2, 1, 1, 1, -1), DomainError);
}

TEST(MoserExponents, Example) {
  auto r = moser_exponents(2, 1, 2, 1, 1);
  ASSERT_TRUE(r.valid);
  ASSERT_TRUE(r.star.has_value());
  EXPECT_NEAR(r.star->alpha, 1.0, kTight);
  EXPECT_NEAR(r.star->gamma, 1.0, kTight);
  EXPECT_NEAR(r.alpha_s, 2.0, kTight);
  EXPECT_THROW(moser_exponents(1, 1, 2, 1, 1), DomainError);
  EXPECT_THROW(moser_exponents(0.5, 1, 2, 1, 1), DomainError);
}

TEST(MoserExponents, SequenceIsPowersOfTwo) {
  auto s = moser_sequence(2, 2, 1, 1, 10);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_DOUBLE_EQ(s.values[k], std::ldexp(1.0, k));
    EXPECT_NEAR(s.closed_form[k], std::ldexp(1.0, k), 1e-9);
  }
  EXPECT_THROW(moser_sequence(1, 2, 1, 1, 3), DomainError);
}

TEST(MoserExponents, BetaSeriesMatchesDirectSum) {
  // kappa = 2, shift = 0: q_nu = 2^nu q0, every ratio kappa q_nu/q_{nu+1} = 1,
  // so S = 1/2 sum 2^{-nu} 2 * 2 q0 = 4 q0 and beta* = (1/q0) * 4 q0 / 4 = 1.
  auto r = moser_exponents(2, 1, 2, 1, 1);
  ASSERT_TRUE(r.star.has_value());
  EXPECT_NEAR(r.star->beta, 1.0, 1e-11);
}

TEST(BarenblattExponent, Examples) {
  EXPECT_NEAR(barenblatt_exponent(1, 3), 0.25, kTight);
  EXPECT_NEAR(barenblatt_exponent(2, 3), 0.4, kTight);
  EXPECT_NEAR(barenblatt_exponent(3, 2), 1.5, kTight);
  EXPECT_THROW(barenblatt_exponent(3, 1.2), DomainError);
}

TEST(PLaplaceExponents, Examples) {
  auto a = plaplace_exponents(3, 2, BoundaryKind::Dirichlet, 1, 2.0);
  ASSERT_TRUE(a.valid);
  EXPECT_NEAR(a.alpha_s, 1.5, kTight);
  EXPECT_NEAR(a.gamma_s, 1.0, kTight);
  ASSERT_TRUE(a.star.has_value());
  EXPECT_NEAR(a.star->alpha, 0.25, kTight);
  EXPECT_NEAR(a.star->gamma, 1.0, kTight);

  auto b = plaplace_exponents(3, 2.5, BoundaryKind::Dirichlet, 1, 2.5);
  ASSERT_TRUE(b.valid);
  EXPECT_NEAR(b.alpha_s, 0.75, kTight);

  auto c = plaplace_exponents(3, 2, BoundaryKind::Dirichlet, 2, 2.0);
  ASSERT_TRUE(c.valid);
  EXPECT_NEAR(c.alpha_s, 0.75, kTight);
}

TEST(PLaplaceExponents, BoundaryConditionsShareExponents) {
  for (double p : {1.8, 2.0, 3.0, 4.0}) {
    auto d = plaplace_exponents(3, p, BoundaryKind::Dirichlet, 1);
    auto n = plaplace_exponents(3, p, BoundaryKind::Neumann, 1);
    auto r = plaplace_exponents(3, p, BoundaryKind::Robin, 1);
    ASSERT_EQ(d.valid, n.valid);
    ASSERT_EQ(d.valid, r.valid);
    if (!d.valid) continue;
    EXPECT_EQ(d.alpha_s, n.alpha_s);
    EXPECT_EQ(d.alpha_s, r.alpha_s);
    EXPECT_EQ(d.gamma_s, r.gamma_s);
  }
}

TEST(PLaplaceExponents, BarenblattIdentity) {
  for (auto [d, p] : {std::pair{2, 1.9}, {3, 2.0}, {3, 2.5}, {4, 3.0}, {5, 4.0}, {1, 3.0}, {2, 3.0}}) {
    auto e = plaplace_exponents(d, p, BoundaryKind::Dirichlet, 1, p);
    ASSERT_TRUE(e.valid) << d << " " << p << " " << e.failed_condition();
    EXPECT_NEAR(e.alpha_s, d / (d * (p - 2.0) + p), kTight) << d << " " << p;
  }
}

TEST(PLaplaceExponents, HeatReduction) {
  for (int d : {1, 2, 3})
    for (double s : {1.0, 2.0}) {
      auto e = plaplace_exponents(d, 2, BoundaryKind::Dirichlet, s);
      ASSERT_TRUE(e.valid) << d << " " << s << " " << e.failed_condition();
      EXPECT_NEAR(e.alpha_s, d / (2.0 * s), kTight);
    }
}

TEST(PLaplaceExponents, NamedSideConditions) {
  // s above the admissible range for p < d
  auto big = plaplace_exponents(3, 2, BoundaryKind::Dirichlet, 7, 2.0);
  EXPECT_FALSE(big.valid);
  EXPECT_EQ(big.failed_condition(), "s_le_d_m0_over_d_minus_p");
  // default m0 inadmissible below 2d/(d+2)
  auto low = plaplace_exponents(3, 1.1, BoundaryKind::Dirichlet, 1);
  EXPECT_FALSE(low.valid);
  EXPECT_EQ(low.failed_condition(), "m0_given_or_default_admissible");
  // p > d needs s <= 2
  auto pd = plaplace_exponents(1, 3, BoundaryKind::Dirichlet, 3);
  EXPECT_FALSE(pd.valid);
  EXPECT_EQ(pd.failed_condition(), "s_le_2");
  EXPECT_THROW(plaplace_exponents(0, 2, BoundaryKind::Dirichlet, 1), DomainError);
  EXPECT_THROW(plaplace_exponents(2, 1, BoundaryKind::Dirichlet, 1), DomainError);
}

TEST(PLaplaceExponents, EqualDimensionThetaFamily) {
  auto a = plaplace_exponents(2, 2, BoundaryKind::Dirichlet, 1, std::nullopt, 0.5);
  ASSERT_TRUE(a.valid);
  EXPECT_EQ(a.case_label, "dirichlet:p=d");
  // p = d = 2 is the heat case: alpha_1 = d/2 = 1 for every theta
  for (double th : {0.2, 0.5, 0.8}) {
    auto e = plaplace_exponents(2, 2, BoundaryKind::Dirichlet, 1, std::nullopt, th);
    ASSERT_TRUE(e.valid);
    EXPECT_NEAR(e.alpha_s, 1.0, kTight);
  }
  auto bad = plaplace_exponents(2, 2, BoundaryKind::Dirichlet, 1, std::nullopt, 1.0);
  EXPECT_FALSE(bad.valid);
}

TEST(DoublyNonlinear, Examples) {
  auto a = doubly_nonlinear_exponents(1, 2, 1, 1);
  ASSERT_TRUE(a.valid);
  EXPECT_EQ(a.case_label, "p>d");
  EXPECT_NEAR(a.star->alpha, 0.25, kTight);
  EXPECT_NEAR(a.star->gamma, 1.0, kTight);
  EXPECT_NEAR(a.alpha_s, 0.5, kTight);
  EXPECT_THROW(doubly_nonlinear_exponents(1, 2, 0, 1), DomainError);
  EXPECT_THROW(doubly_nonlinear_exponents(1, 2, -1, 1), DomainError);
}

TEST(DoublyNonlinear, UnitMMatchesPLaplace) {
  auto dn = doubly_nonlinear_exponents(3, 2, 1, 1, 2.0);
  auto pl = plaplace_exponents(3, 2, BoundaryKind::Dirichlet, 1, 2.0);
  ASSERT_TRUE(dn.valid);
  ASSERT_TRUE(pl.valid);
  EXPECT_NEAR(dn.alpha_s, pl.alpha_s, kTight);
  EXPECT_NEAR(dn.gamma_s, pl.gamma_s, kTight);
  EXPECT_NEAR(dn.star->alpha, pl.star->alpha, kTight);
  EXPECT_NEAR(dn.star->gamma, pl.star->gamma, kTight);
}

TEST(DoublyNonlinear, UnitMOverlapAcrossCases) {
  for (auto [d, p] : {std::pair{1, 2.0}, {3, 2.0}, {1, 3.0}, {3, 2.5}, {4, 3.0}})
    for (double s : {1.0, 2.0}) {
      auto dn = doubly_nonlinear_exponents(d, p, 1, s, p);
      auto pl = plaplace_exponents(d, p, BoundaryKind::Dirichlet, s, p);
      ASSERT_TRUE(dn.valid && pl.valid) << d << " " << p << " " << s;
      EXPECT_NEAR(dn.alpha_s, pl.alpha_s, kTight) << d << " " << p << " " << s;
      EXPECT_NEAR(dn.gamma_s, pl.gamma_s, kTight) << d << " " << p << " " << s;
    }
}

TEST(DoublyNonlinear, EqualDimensionApproachesPLaplace) {
  // at p = d = 2, m = 1 the Moser route gives alpha_1 = 1/theta
  for (double th : {0.3, 0.6, 0.9}) {
    auto e = doubly_nonlinear_exponents(2, 2, 1, 1, 2.0, th);
    ASSERT_TRUE(e.valid);
    EXPECT_NEAR(e.alpha_s, 1.0 / th, 1e-12);
  }
  // the reduction loses about log10(1/(1-theta)) digits, so stop at 1e-6
  auto pl = plaplace_exponents(2, 2, BoundaryKind::Dirichlet, 1);
  ASSERT_TRUE(pl.valid);
  double prev = INFINITY;
  for (double gap : {1e-2, 1e-4, 1e-6}) {
    auto near = doubly_nonlinear_exponents(2, 2, 1, 1, 2.0, 1.0 - gap);
    ASSERT_TRUE(near.valid);
    const double dev = std::abs(near.alpha_s - pl.alpha_s);
    EXPECT_NEAR(dev, gap / (1.0 - gap), 1e-8);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
}

TEST(DoublyNonlinear, PorousMediumPrediction) {
  // m = 2, p = 2, d = 1: alpha_1 = 1/(d(m-1)+2) = 1/3
  auto e = doubly_nonlinear_exponents(1, 2, 2, 1);
  ASSERT_TRUE(e.valid);
  EXPECT_NEAR(e.alpha_s, 1.0 / 3, kTight);
}

TEST(DtN, Example) {
  auto e = dtn_exponents(3, 2, 1, 2.0);
  ASSERT_TRUE(e.valid) << e.failed_condition();
  EXPECT_NEAR(e.star->alpha, 0.5, kTight);
  EXPECT_NEAR(e.star->gamma, 1.0, kTight);
  // f = s(d-p)/((d-1)m0) = 1/4, alpha_1 = (1/2)/(1/4)
  EXPECT_NEAR(e.alpha_s, 2.0, kTight);
}

TEST(Fractional, InvalidOrder) {
  EXPECT_THROW(fractional_exponents(3, 2, 0.0, 1), DomainError);
  EXPECT_THROW(fractional_exponents(3, 2, 1.0, 1), DomainError);
  EXPECT_THROW(fractional_exponents(3, 2, 1.5, 1), DomainError);
}

TEST(Fractional, LocalLimitMatchesPLaplace) {
  for (double p : {1.8, 2.0, 2.5}) {
    auto f = fractional_exponents(3, p, 1.0 - 1e-10, 1, p);
    auto pl = plaplace_exponents(3, p, BoundaryKind::Dirichlet, 1, p);
    ASSERT_TRUE(f.valid && pl.valid) << p;
    EXPECT_NEAR(f.alpha_s, pl.alpha_s, 1e-8) << p;
    EXPECT_NEAR(f.gamma_s, pl.gamma_s, 1e-8) << p;
  }
}

TEST(ChainedExponents, FullRangeReturnsStar) {
  GNParams p = gn(2, 3, 0);
  p.r = LebesgueIndex::finite(6);
  const auto base = smoothing_exponents(p);
  const double m0 = 4;
  auto star = extrapolate_to_infinity(2, p.r, base.gamma, base.alpha, base.beta, m0);
  ASSERT_TRUE(star.valid);
  const double s_max = base.gamma * 6 * m0 / 2;
  auto e = chained_exponents(p, m0, s_max);
  ASSERT_TRUE(e.valid);
  EXPECT_NEAR(e.alpha_s, star.alpha_star, kTight);
  EXPECT_NEAR(e.gamma_s, star.gamma_star, kTight);
  auto over = chained_exponents(p, m0, s_max * 1.01);
  EXPECT_FALSE(over.valid);
  EXPECT_EQ(over.failed_condition(), "s_le_s_max");
}

TEST(Exponents, Pure) {
  auto a = plaplace_exponents(3, 2.5, BoundaryKind::Neumann, 1.5);
  auto b = plaplace_exponents(3, 2.5, BoundaryKind::Neumann, 1.5);
  EXPECT_EQ(a.alpha_s, b.alpha_s);
  EXPECT_EQ(a.beta_s, b.beta_s);
  EXPECT_EQ(a.gamma_s, b.gamma_s);
  auto c = doubly_nonlinear_exponents(3, 2.5, 1.5, 1.0);
  auto d = doubly_nonlinear_exponents(3, 2.5, 1.5, 1.0);
  EXPECT_EQ(c.beta_s, d.beta_s);
}
