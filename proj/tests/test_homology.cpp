#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace spectori;

namespace {
Eigen::MatrixXi standard_symplectic(int g) {
  Eigen::MatrixXi J = Eigen::MatrixXi::Zero(2 * g, 2 * g);
  for (int i = 0; i < g; ++i) {
    J(i, g + i) = 1;
    J(g + i, i) = -1;
  }
  return J;
}

void expect_symplectic(const ModuliPoint& p) {
  auto cs = canonical_contours(p);
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    const auto& cc = cs.on(s);
    ASSERT_EQ(cc.a.size(), cc.b.size());
    EXPECT_EQ(cc.intersection, standard_symplectic(int(cc.a.size()))) << to_record(p).str() << " " << to_string(s);
  }
}
}  // namespace

TEST(Contours, OddBaseCaseLayout) {
  auto cs = canonical_contours(make_odd(2.5));
  EXPECT_TRUE(cs.plus.a.empty());
  ASSERT_EQ(cs.minus.a.size(), 1u);
  EXPECT_EQ(cs.minus.a[0].label.str(), "a0");
  EXPECT_EQ(cs.minus.b[0].label.str(), "b0");
  EXPECT_EQ(cs.minus.intersection(0, 1), 1);
  ASSERT_EQ(cs.openCurves.size(), 2u);
  EXPECT_EQ(cs.c(1).curveSign, CurveSign::Plus);
  EXPECT_EQ(cs.c(-1).curveSign, CurveSign::Plus);
}

TEST(Contours, EvenBaseCaseOpenCurves) {
  auto p = make_even();
  auto cs = canonical_contours(p);
  auto cv = quotient_curves(p);
  const auto& c1 = cs.c(1);
  const auto& cm = cs.c(-1);
  EXPECT_EQ(c1.curveSign, CurveSign::Plus);
  EXPECT_EQ(cm.curveSign, CurveSign::Minus);
  EXPECT_NEAR(std::abs(c1.path.start() - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c1.startFiber - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(continue_to(analytic_curve(cv.first), c1.path, c1.startFiber) + 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(cm.startFiber - 2.0 * kI), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(continue_to(analytic_curve(cv.second), cm.path, cm.startFiber) + 2.0 * kI), 0.0, 1e-12);
}

TEST(Contours, WindingNumbers) {
  auto p = make_odd(3.0, {{0.3, 0.8}});
  auto cs = canonical_contours(p);
  const auto& a1 = cs.plus.a[0];
  EXPECT_EQ(std::abs(winding_number(a1.path, p.lambdas[0])), 1);
  EXPECT_EQ(std::abs(winding_number(a1.path, p.lambdas[1])), 1);
  EXPECT_EQ(winding_number(a1.path, Complex(3.0)), 0);
  EXPECT_EQ(winding_number(a1.path, Complex(2.0)), 0);
  EXPECT_EQ(winding_number(a1.path, Complex(-2.0)), 0);
  const auto& a0 = cs.minus.a[0];
  EXPECT_EQ(std::abs(winding_number(a0.path, Complex(3.0))), 1);
  EXPECT_EQ(std::abs(winding_number(a0.path, Complex(2.0))), 1);
  EXPECT_EQ(winding_number(a0.path, p.lambdas[0]), 0);
  const auto& c1 = cs.c(1);
  EXPECT_EQ(std::abs(winding_number(c1.path, Complex(3.0))), 1);
  EXPECT_EQ(winding_number(c1.path, p.lambdas[0]), 0);
  EXPECT_EQ(winding_number(c1.path, Complex(-2.0)), 0);
}

TEST(Contours, IntersectionMatricesAreSymplectic) {
  std::mt19937 rng(99);
  for (auto f : {Family::Odd, Family::Even})
    for (int n = 0; n <= 3; ++n) expect_symplectic(oracle::random_point(rng, f, n));
  expect_symplectic(make_odd(2.5, {{0.3, 0.8}, {-0.9, 0.4}}));
  expect_symplectic(make_even({{0.3, 0.8}, {-0.9, 0.4}}));
}

TEST(Contours, ClosedCyclesReturnToStartFiber) {
  auto p = make_odd(3.5, {{0.3, 0.8}, {-1.1, 0.4}});
  auto cs = canonical_contours(p);
  auto cv = quotient_curves(p);
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    auto curve = analytic_curve(pick(cv, s));
    for (const auto* group : {&cs.on(s).a, &cs.on(s).b})
      for (const auto& c : *group) {
        EXPECT_TRUE(c.path.closed);
        EXPECT_LT(std::abs(c.startFiber * c.startFiber - curve.P(c.path.start())), 1e-12 * std::abs(curve.P(c.path.start())));
        EXPECT_LT(std::abs(continue_to(curve, c.path, c.startFiber) - c.startFiber), 1e-9);
      }
  }
}

TEST(Contours, ErrorCodes) {
  try {
    canonical_contours(make_odd(3.0, {{0.3, 0.8}}), 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Clearance);
  }
  try {
    canonical_contours(make_odd(3.0, {{1.95, 0.8}}), 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Degenerate);
  }
  EXPECT_NO_THROW(canonical_contours(make_odd(3.0, {{1.95, 0.8}})));
}

TEST(LargeCircle, ClosedClockwiseAndTooSmall) {
  auto p = make_odd(2.5);
  auto g = large_circle(p, 10.0, CurveSign::Minus);
  auto curve = analytic_curve(quotient_curves(p).second);
  EXPECT_TRUE(g.path.closed);
  EXPECT_NEAR(std::abs(g.path.start() - g.path.end()), 0.0, 1e-12);
  // Odd degree: one turn around every finite branch point swaps the sheet. The pair μ ± iν on the circle swaps it back.
  EXPECT_LT(std::abs(continue_to(curve, g.path, g.startFiber) + g.startFiber), 1e-9);
  // ∮ dz/z over the projection, by the trapezoid rule on the arc.
  const auto& seg = g.path.segments.front();
  Complex total = 0.0;
  const int N = 4096;
  for (int k = 0; k < N; ++k) {
    double s = (k + 0.5) / N;
    total += seg.tangent(s) / seg.point(s) / double(N);
  }
  EXPECT_NEAR(std::abs(total + 2.0 * kPi * kI), 0.0, 1e-12);
  try {
    large_circle(p, 1.25, CurveSign::Plus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooSmall);
  }
}

TEST(Involutions, SigmaTwiceIsIdentity) {
  auto cs = canonical_contours(make_odd(3.0, {{0.3, 0.8}}));
  const auto& b = cs.plus.b[0];
  auto bb = involution_image(involution_image(b, Involution::Sigma), Involution::Sigma);
  EXPECT_EQ(bb.startFiber, b.startFiber);
  EXPECT_EQ(bb.path.segments.size(), b.path.segments.size());
}

TEST(Involutions, RhoFixesSymmetricStadiumSetwise) {
  auto cs = canonical_contours(make_odd(3.0, {{0.3, 0.8}}));
  const auto& a = cs.plus.a[0];
  auto img = involution_image(a, Involution::Rho);
  auto pts = sample_path(a.path, 64);
  for (const auto& z : sample_path(img.path, 64)) {
    double best = 1e300;
    for (const auto& q : pts) best = std::min(best, std::abs(q - z));
    EXPECT_LT(best, 0.05);
  }
}
