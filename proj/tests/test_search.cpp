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

ChartTarget three_fifths() {
  ChartTarget T;
  T.plus.chart = 1;
  T.plus.ratios = {{3, 5}};
  return T;
}
}  // namespace

TEST(Rationals, BestRationalMatchesBruteForce) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 300; ++k) {
    double x = u(rng);
    long maxDen = 1 + k % 97;
    auto r = best_rational(x, maxDen);
    auto b = oracle::brute_best_rational(x, maxDen);
    EXPECT_LE(r.den, maxDen);
    EXPECT_NEAR(std::abs(r.value() - x), std::abs(double(b.num) / double(b.den) - x), 1e-15) << x << " " << maxDen;
  }
  EXPECT_EQ(best_rational(0.6, 50).str(), "3/5");
  EXPECT_EQ(best_rational(-2.0, 7).str(), "-2/1");
}

TEST(Rationals, Parse) {
  auto r = parse_rational("3/5");
  EXPECT_EQ(r.num, 3);
  EXPECT_EQ(r.den, 5);
  EXPECT_EQ(parse_rational("-7").den, 1);
  EXPECT_THROW(parse_rational("3/0"), Error);
  EXPECT_THROW(parse_rational("x/2"), Error);
}

TEST(Rationals, ProjectExamples) {
  auto a = rational_project({1.0, kPi}, 100);
  ASSERT_EQ(a.ratios.size(), 1u);
  EXPECT_EQ(a.ratios[0].str(), "311/99");
  EXPECT_NEAR(a.distance, 1.64e-5, 1e-7);
  auto b = rational_project({6.0, 10.0}, 50);
  EXPECT_EQ(b.ratios[0].str(), "5/3");
  EXPECT_EQ(b.distance, 0.0);
  auto c = rational_project({6.0, 10.0}, 50, 1);
  EXPECT_EQ(c.ratios[0].str(), "3/5");
  EXPECT_EQ(code_of([] { rational_project({0.0, 0.0}, 10); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { rational_project({0.0, 1.0}, 10, 0); }), ErrorCode::ZeroVector);
}

TEST(Rationals, ProjectionIsIdempotent) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> v{u(rng), u(rng), u(rng)};
    auto t = rational_project(v, 30);
    std::vector<double> w = t.values();
    w.insert(w.begin() + t.chart, 1.0);
    auto t2 = rational_project(w, 30);
    ASSERT_EQ(t2.ratios.size(), t.ratios.size());
    for (std::size_t i = 0; i < t.ratios.size(); ++i) EXPECT_EQ(t2.ratios[i].str(), t.ratios[i].str());
    EXPECT_LT(t2.distance, 1e-15);
  }
}

TEST(Newton, ReachesThreeFifths) {
  auto r = newton_to_rational(make_odd(4.0), three_fifths());
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_NEAR(r.point.R - 2.0, 2.25, 1e-8);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LT(r.history[k], r.history[k - 1]);
  auto again = newton_to_rational(r.point, three_fifths());
  EXPECT_EQ(again.iterations, 0);
  EXPECT_EQ(again.point.R, r.point.R);
}

TEST(Newton, ErrorCodes) {
  auto p = make_odd(3.0);
  ChartMap flat = [](const ModuliPoint&) { return std::vector<double>{1.0}; };
  EXPECT_EQ(code_of([&] { newton_solve(p, flat, {2.0}); }), ErrorCode::NoProgress);
  // Target only reachable below R = 2, where every trial point is rejected.
  ChartMap lin = [](const ModuliPoint& q) {
    validate_moduli_point(q);
    return std::vector<double>{q.R};
  };
  EXPECT_EQ(code_of([&] { newton_solve(p, lin, {1.0}); }), ErrorCode::LeftModuli);
  NewtonOptions few;
  few.maxIter = 2;
  ChartMap slow = [](const ModuliPoint& q) { return std::vector<double>{std::atan(q.R - 3.0)}; };
  EXPECT_EQ(code_of([&] { newton_solve(make_odd(9.0), slow, {0.0}, few); }), ErrorCode::MaxIter);
  EXPECT_EQ(code_of([&] { newton_solve(p, flat, {1.0, 2.0}); }), ErrorCode::RejectRange);
}

TEST(Scale, EvenBaseCase) {
  auto c = scale_and_type(make_even());
  EXPECT_NEAR(c.sPlus, 0.125, 1e-12);
  EXPECT_NEAR(c.sMinus, 0.125, 1e-12);
  EXPECT_EQ(c.integerPeriodsPlus, std::vector<long>{-1});
  EXPECT_EQ(c.integerPeriodsMinus, std::vector<long>{1});
  EXPECT_NEAR(std::abs(c.tau - kI), 0.0, 1e-12);
}

TEST(Scale, PrimitiveScalingAndErrors) {
  auto c = scale_periods(make_odd(3.0), {0.3, 0.5}, {2.0});
  EXPECT_EQ(c.integerPeriodsPlus, (std::vector<long>{3, 5}));
  EXPECT_NEAR(c.sPlus, 10.0, 1e-12);
  EXPECT_EQ(c.integerPeriodsMinus, std::vector<long>{1});
  EXPECT_NEAR(c.sMinus, 0.5, 1e-15);
  EXPECT_EQ(code_of([] { scale_periods(make_odd(3.0), {1.0, std::sqrt(2.0)}, {1.0}); }), ErrorCode::NotRational);
  ScaleOptions small;
  small.maxInt = 10;
  EXPECT_EQ(code_of([&] { scale_periods(make_odd(3.0), {1.0, 47.0 / 49.0}, {1.0}, small); }), ErrorCode::Overflow);
  EXPECT_EQ(code_of([] { scale_periods(make_odd(3.0), {0.0, 0.0}, {1.0}); }), ErrorCode::ZeroVector);
}

TEST(Verify, GenusOneCandidatePasses) {
  auto r = newton_to_rational(make_odd(4.0), three_fifths());
  auto c = scale_and_type(r.point);
  EXPECT_EQ(c.integerPeriodsPlus, (std::vector<long>{3, 5}));
  EXPECT_EQ(c.integerPeriodsMinus, std::vector<long>{1});
  EXPECT_NEAR(c.sPlus, 0.5, 1e-9);
  auto rep = verify_candidate(c);
  EXPECT_TRUE(rep.overall);
  for (const auto& ch : rep.checks) EXPECT_LE(ch.residual, 1e-8) << ch.name;
  ASSERT_NE(rep.find("g_x_level_a0"), nullptr);

  auto bad = c;
  bad.sPlus += 1e-3;
  auto rb = verify_candidate(bad);
  EXPECT_FALSE(rb.overall);
  EXPECT_FALSE(rb.find("c_integrality")->pass);
  EXPECT_NEAR(rb.find("c_integrality")->residual, 0.01, 1e-6);
  EXPECT_FALSE(rb.find("e_independent_tau")->pass);
}

TEST(Verify, UnitCircleBranchPointFails) {
  SpectralCandidate c;
  c.point.family = Family::Odd;
  c.point.R = 3.0;
  c.point.n = 1;
  c.point.lambdas = {1.0, 1.5};
  c.point.realForm = false;
  c.sPlus = c.sMinus = 1.0;
  c.tau = kI;
  c.integerPeriodsPlus = {1, 1, 1};
  c.integerPeriodsMinus = {1, 1};
  auto rep = verify_candidate(c);
  EXPECT_FALSE(rep.overall);
  EXPECT_FALSE(rep.find("a_reality_no_unit_branch")->pass);
}

TEST(Verify, ReportRecords) {
  auto rep = verify_candidate(scale_and_type(make_even()));
  auto recs = to_records(rep);
  ASSERT_EQ(recs.size(), rep.checks.size() + 1);
  EXPECT_EQ(recs.back().str(), "verification overall=1");
  EXPECT_EQ(recs.front().str().rfind("check name=a_reality_no_unit_branch pass=1", 0), 0u);
}

TEST(Candidate, RecordRoundTrip) {
  auto c = scale_and_type(make_odd(2.0 + 2.25));
  auto line = to_record(c).str();
  auto d = candidate_from_record(line);
  EXPECT_EQ(d.point.R, c.point.R);
  EXPECT_EQ(d.sPlus, c.sPlus);
  EXPECT_EQ(d.sMinus, c.sMinus);
  EXPECT_EQ(d.integerPeriodsPlus, c.integerPeriodsPlus);
  EXPECT_EQ(d.integerPeriodsMinus, c.integerPeriodsMinus);
  EXPECT_EQ(d.tau, c.tau);
  EXPECT_EQ(to_record(d).str(), line);
  EXPECT_THROW(candidate_from_record("candidate family=odd n=0 R=3"), Error);
}
