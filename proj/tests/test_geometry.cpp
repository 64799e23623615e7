#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace spectori;

namespace {
ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}
}  // namespace

TEST(Validate, AcceptsBaseCases) {
  auto p = make_odd(2.1);
  EXPECT_EQ(p.genus(), 1);
  auto q = make_odd(3.0, {{0.0, 1.0}});
  EXPECT_TRUE(q.realForm);
  EXPECT_EQ(q.lambdas[1], Complex(0.0, -1.0));
}

TEST(Validate, Rejections) {
  EXPECT_EQ(code_of([] { make_even({{2.0, 0.0}}); }), ErrorCode::RejectCollision);
  EXPECT_EQ(code_of([] { make_odd(2.0); }), ErrorCode::RejectRange);
  EXPECT_EQ(code_of([] { make_odd(1.5); }), ErrorCode::RejectRange);
  EXPECT_EQ(code_of([] { make_odd(3.0, {{0.3, 0.5}, {0.3, 0.5}}); }), ErrorCode::RejectCollision);
  EXPECT_EQ(code_of([] {
              ModuliPoint p;
              p.family = Family::Odd;
              p.R = 3.0;
              p.n = 1;
              p.lambdas = {{0.3, 0.5}, {0.3, 0.4}};
              validate_moduli_point(p);
            }),
            ErrorCode::RejectConjugacy);
  EXPECT_EQ(code_of([] { make_odd(3.0, {{2.5, 0.5}}); }), ErrorCode::RejectRange);
  EXPECT_EQ(code_of([] {
              ModuliPoint p;
              p.family = Family::Even;
              p.n = 1;
              p.lambdas = {{0.3, 0.5}};
              validate_moduli_point(p);
            }),
            ErrorCode::RejectRange);
}

TEST(QuotientCurves, BranchSets) {
  auto [cp, cm] = quotient_curves(make_odd(2.1));
  EXPECT_EQ(cp.degree, 1);
  EXPECT_EQ(cm.degree, 3);
  EXPECT_EQ(cp.branchPoints[0], Complex(2.1));
  auto [ep, em] = quotient_curves(make_even());
  EXPECT_EQ(ep.branchPoints, std::vector<Complex>{-2.0});
  EXPECT_EQ(em.branchPoints, std::vector<Complex>{2.0});
  auto d = with_degeneration(make_odd(3.0, {{0.0, 1.0}}), 0.5, 0.0);
  auto [dp, dm] = quotient_curves(d);
  ASSERT_TRUE(dp.degenerateRoot && dm.degenerateRoot);
  EXPECT_EQ(*dp.degenerateRoot, Complex(0.5));
  EXPECT_EQ(dp.smooth_branch_points().size(), 3u);
}

TEST(QuotientCurves, DegreeRelation) {
  std::mt19937 rng(11);
  for (int n = 0; n <= 3; ++n) {
    auto po = oracle::random_point(rng, Family::Odd, n);
    auto [op, om] = quotient_curves(po);
    EXPECT_EQ(op.degree + 2, om.degree);
    auto pe = oracle::random_point(rng, Family::Even, n);
    auto [ep, em] = quotient_curves(pe);
    EXPECT_EQ(ep.degree, em.degree);
  }
}

TEST(SpectralModel, OddBaseCase) {
  auto m = spectral_model(make_odd(2.5));
  EXPECT_EQ(m.genus, 1);
  ASSERT_EQ(m.xBranchPoints.size(), 3u);
  EXPECT_NEAR(std::abs(m.xBranchPoints[1] - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(m.xBranchPoints[2] - 0.5), 0.0, 1e-14);
  EXPECT_TRUE(m.hasZeroBranch);
}

TEST(SpectralModel, EvenBackSubstitution) {
  auto p = make_even({{0.0, 1.0}});
  auto m = spectral_model(p);
  EXPECT_EQ(m.genus, 2);
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    Complex a = m.alphas[i];
    EXPECT_LT(std::abs(a + 1.0 / a - p.lambdas[i]), 1e-13);
    EXPECT_GT(std::abs(a), 1.0);
  }
}

TEST(SpectralModel, UnitModulusRejected) {
  ModuliPoint p;
  p.family = Family::Odd;
  p.R = 2.0;
  EXPECT_EQ(code_of([&] { spectral_model(p); }), ErrorCode::UnitModulus);
}

TEST(SpectralModel, InversionClosure) {
  std::mt19937 rng(5);
  for (auto f : {Family::Odd, Family::Even})
    for (int n = 0; n <= 2; ++n) {
      auto m = spectral_model(oracle::random_point(rng, f, n));
      for (const auto& b : m.xBranchPoints) {
        if (b == 0.0) continue;
        double inv = 1e300, invConj = 1e300;
        for (const auto& o : m.xBranchPoints) {
          inv = std::min(inv, std::abs(o - 1.0 / b));
          invConj = std::min(invConj, std::abs(o - 1.0 / std::conj(b)));
        }
        EXPECT_LT(inv, 1e-12);
        EXPECT_LT(invConj, 1e-12);
      }
    }
}

TEST(QuotientMap, FixedPoints) {
  auto p = make_odd(2.5);
  auto m = spectral_model(p);
  Complex y = std::sqrt(m.P(1.0));
  auto img = quotient_map_check(p, 1.0, y);
  EXPECT_NEAR(std::abs(img.z - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(img.wPlus - y), 0.0, 1e-15);
  Complex ym = std::sqrt(m.P(-1.0));
  EXPECT_NEAR(std::abs(quotient_map_check(p, -1.0, ym).z + 2.0), 0.0, 1e-15);
  EXPECT_EQ(code_of([&] { quotient_map_check(p, 0.3, 1.0); }), ErrorCode::OffCurve);
}

TEST(QuotientMap, RandomSamplesLandOnCurves) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto f : {Family::Odd, Family::Even})
    for (int n = 0; n <= 2; ++n) {
      auto p = oracle::random_point(rng, f, n);
      auto m = spectral_model(p);
      for (int k = 0; k < 100; ++k) {
        Complex x(u(rng), u(rng));
        auto img = quotient_map_check(p, x, std::sqrt(m.P(x)));
        EXPECT_LT(img.residualPlus, 1e-10);
        EXPECT_LT(img.residualMinus, 1e-10);
      }
    }
}

TEST(ModuliRecord, RoundTrip) {
  auto p = with_degeneration(make_odd(3.0000000000000004, {{0.1, 0.7}, {-1.2345678901234567, 0.3}}), -0.4, 0.0);
  auto q = moduli_point_from_record(to_record(p).str());
  EXPECT_EQ(q.family, p.family);
  EXPECT_EQ(q.R, p.R);
  EXPECT_EQ(q.lambdas, p.lambdas);
  ASSERT_TRUE(q.degeneration);
  EXPECT_EQ(q.degeneration->mu, -0.4);
  EXPECT_EQ(to_record(q).str(), to_record(p).str());
}
