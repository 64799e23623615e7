#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace spectori;

TEST(FiniteDifferences, KnownFunctions) {
  Evaluator f = [](const ModuliPoint& p) {
    double x = p.R, y = p.upper(0).real();
    return std::vector<double>{std::sin(x) * y, std::exp(0.3 * x) + y * y * y};
  };
  auto p = make_odd(3.0, {{0.4, 0.9}});
  auto dR = fd_derivative(f, p, {CoordKind::R, 0}, 1);
  EXPECT_NEAR(dR.value[0], std::cos(3.0) * 0.4, 1e-9);
  EXPECT_NEAR(dR.value[1], 0.3 * std::exp(0.9), 1e-9);
  auto dy2 = fd_derivative(f, p, {CoordKind::ReLambda, 0}, 2);
  EXPECT_NEAR(dy2.value[0], 0.0, 1e-9);
  EXPECT_NEAR(dy2.value[1], 6.0 * 0.4, 1e-7);
  FdOptions fwd;
  fwd.scheme = FdScheme::Forward;
  fwd.step = 1e-4;
  EXPECT_NEAR(fd_derivative(f, p, {CoordKind::R, 0}, 1, fwd).value[0], std::cos(3.0) * 0.4, 1e-7);
  EXPECT_THROW(fd_derivative(f, p, {CoordKind::R, 0}, 3), Error);
}

TEST(FiniteDifferences, ConjugatePairMovesTogether) {
  auto p = make_odd(3.0, {{0.4, 0.9}});
  auto q = shifted(p, {CoordKind::ImLambda, 0}, 0.1);
  EXPECT_TRUE(q.realForm);
  EXPECT_NEAR(q.upper(0).imag(), 1.0, 1e-15);
  for (const auto& l : q.lambdas) EXPECT_NEAR(std::abs(l.imag()), 1.0, 1e-15);
}

TEST(FiniteDifferences, PeriodDerivativeMatchesClosedForm) {
  // I_+ = (4 t^{1/2}, 4 (4 + t)^{1/2}) on the ODD n=0 family.
  double t = 0.5;
  auto d = fd_derivative(period_evaluator(variation_eval_options()), make_odd(2.0 + t), {CoordKind::R, 0}, 1);
  EXPECT_NEAR(d.value[0], 2.0 / std::sqrt(t), 1e-7);
  EXPECT_NEAR(d.value[1], 2.0 / std::sqrt(4.0 + t), 1e-7);
}

TEST(Span, RanksAtBaseAndGenusTwo) {
  for (double t : {0.1, 1.0, 2.0}) {
    auto S = span_rank(make_odd(2.0 + t));
    EXPECT_EQ(S.rank, 3) << t;
    EXPECT_EQ(S.rows.size(), 3u);
  }
  auto S1 = span_rank(make_odd(3.0, {{0.3, 0.8}}));
  EXPECT_EQ(S1.rows.size(), 5u);
  EXPECT_EQ(S1.rank, 5);
  EXPECT_TRUE(std::isfinite(S1.conditionNumber));
}

TEST(Span, HMatrixAtDegeneratePoints) {
  for (double mu : {-1.3, 0.4}) {
    auto H = h_matrix(with_degeneration(make_odd(2.5), mu, 0.0));
    ASSERT_EQ(H.rows.size(), 5u);
    EXPECT_EQ(H.rank, 5);
    EXPECT_GT(std::abs(H.determinant), 0.0);
  }
  EXPECT_THROW(h_matrix(make_odd(2.5)), Error);
}

TEST(NuFlatness, SlopeAtZeroVanishes) {
  auto p0 = with_degeneration(make_odd(2.5), 0.5, 0.0);
  Evaluator f = period_evaluator(variation_eval_options());
  FdOptions fo;
  fo.scheme = FdScheme::Forward;
  fo.step = 1e-3;
  auto s = fd_derivative(f, p0, {CoordKind::Nu, 0}, 1, fo);
  for (double x : s.value) EXPECT_LE(std::abs(x), 1e-6);
}

TEST(Asymptotics, LargeCirclePeriodAndReciprocity) {
  auto p = make_odd(3.0, {{0.3, 0.8}});
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    auto fit = asymptotic_probe(p, AsymptoticQuantity::BNextPeriod, s, {1e2, 1e3, 1e4});
    EXPECT_NEAR(fit.fittedOrder, -1.5, 0.2);
    auto kap = asymptotic_probe(p, AsymptoticQuantity::Kappa, s, {1e2, 1e3});
    for (const auto& smp : kap.samples) EXPECT_LE(smp.residual / std::abs(smp.predicted), 1e-8);
  }
}

TEST(Asymptotics, LogLogSlope) {
  std::vector<double> x{1.0, 10.0, 100.0}, y{2.0, 2.0 * std::pow(10.0, -1.5), 2.0 * std::pow(100.0, -1.5)};
  EXPECT_NEAR(log_log_slope(x, y), -1.5, 1e-12);
}

TEST(Asymptotics, MuInsideBranchPointsRejected) {
  auto p = make_odd(3.0, {{0.3, 0.8}});
  EXPECT_THROW(asymptotic_probe(p, AsymptoticQuantity::BNextPeriod, CurveSign::Plus, {2.0}), Error);
}
