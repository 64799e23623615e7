#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "variation.hpp"

namespace spectori {

struct Rational {
  long num = 0;
  long den = 1;

  double value() const { return double(num) / double(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return {parse_long(s, "rational"), 1};
  Rational r{parse_long(s.substr(0, slash), "numerator"), parse_long(s.substr(slash + 1), "denominator")};
  if (r.den <= 0) throw Error(ErrorCode::Parse, "denominator must be positive in '" + s + "'");
  return r;
}

// Closest fraction to x with denominator ≤ maxDen (convergents and semiconvergents).
inline Rational best_rational(double x, long maxDen) {
  if (maxDen < 1) throw Error(ErrorCode::RejectRange, "maxDen must be positive");
  double fl = std::floor(x);
  if (std::abs(fl) > 1e15) throw Error(ErrorCode::Overflow, "value too large for a rational approximation");
  long p0 = 1, q0 = 0, p1 = long(fl), q1 = 1;
  double frac = x - fl;
  while (frac > 1e-15) {
    double inv = 1.0 / frac;
    double ad = std::floor(inv);
    if (ad > 1e15) break;
    long a = long(ad);
    frac = inv - ad;
    if (q0 + a * q1 > maxDen) {
      long k = (maxDen - q0) / q1;
      Rational semi{p0 + k * p1, q0 + k * q1}, conv{p1, q1};
      if (k > 0 && std::abs(semi.value() - x) < std::abs(conv.value() - x)) return semi;
      return conv;
    }
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
  }
  return {p1, q1};
}

// A rational point of projective space in the chart v[chart] = 1.
struct RationalTarget {
  int chart = 0;
  std::vector<Rational> ratios;  // v[i]/v[chart] for i ≠ chart, in index order
  long maxDenominator = 50;
  double distance = 0.0;         // sine of the angle between v and the rational point

  std::vector<double> values() const {
    std::vector<double> out;
    for (const auto& r : ratios) out.push_back(r.value());
    return out;
  }
};

inline std::vector<double> chart_ratios(const std::vector<double>& v, int chart) {
  std::vector<double> out;
  for (int i = 0; i < int(v.size()); ++i)
    if (i != chart) out.push_back(v[i] / v[chart]);
  return out;
}

namespace detail {
inline double sine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double aa = 0, bb = 0, ab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) aa += a[i] * a[i], bb += b[i] * b[i], ab += a[i] * b[i];
  double c = std::min(1.0, std::abs(ab) / std::sqrt(aa * bb));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}
}  // namespace detail

inline RationalTarget rational_project(const std::vector<double>& v, long maxDen, int chart = 0) {
  double norm = 0.0;
  for (double x : v) norm = std::max(norm, std::abs(x));
  if (v.empty() || norm == 0.0) throw Error(ErrorCode::ZeroVector, "cannot project the zero vector");
  if (chart < 0 || chart >= int(v.size())) throw Error(ErrorCode::RejectRange, "chart index out of range");
  if (v[chart] == 0.0) throw Error(ErrorCode::ZeroVector, "chart entry vanishes");
  RationalTarget t;
  t.chart = chart;
  t.maxDenominator = maxDen;
  std::vector<double> approx;
  for (int i = 0; i < int(v.size()); ++i) {
    if (i == chart) {
      approx.push_back(1.0);
      continue;
    }
    Rational r = best_rational(v[i] / v[chart], maxDen);
    t.ratios.push_back(r);
    approx.push_back(r.value());
  }
  t.distance = detail::sine_distance(v, approx);
  return t;
}

struct ChartTarget {
  RationalTarget plus, minus;

  std::vector<double> values() const {
    std::vector<double> v = plus.values(), m = minus.values();
    v.insert(v.end(), m.begin(), m.end());
    return v;
  }
};

using ChartMap = std::function<std::vector<double>(const ModuliPoint&)>;

// p ↦ (ratios of I_+, ratios of I_−) in the charts of the target.
inline ChartMap period_chart(const ChartTarget& target, const EvalOptions& eval = variation_eval_options()) {
  return [target, eval](const ModuliPoint& p) {
    EvalOptions e = eval;
    e.withHat = false;
    PeriodVector v = period_vectors(p, e);
    std::vector<double> out = chart_ratios(v.plus, target.plus.chart), m = chart_ratios(v.minus, target.minus.chart);
    out.insert(out.end(), m.begin(), m.end());
    return out;
  };
}

struct NewtonOptions {
  int maxIter = 60;
  double tol = 1e-10;
  int maxHalvings = 30;
  double singularRatio = 1e-12;
  double boundaryRatio = 1e-7;  // collision distance / coordinate scale below which the iterate has left
  FdOptions fd;
};

struct NewtonResult {
  ModuliPoint point;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

namespace detail {
inline double max_residual(const std::vector<double>& f, const std::vector<double>& t) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - t[i]));
  return m;
}
}  // namespace detail

// Damped Newton for F(p) = target over the moduli coordinates, FD Jacobian.
inline NewtonResult newton_solve(const ModuliPoint& p0, const ChartMap& F, const std::vector<double>& target,
                                 const NewtonOptions& opt = {}) {
  auto coords = moduli_coordinates(p0);
  NewtonResult res;
  res.point = p0;
  std::vector<double> f = F(p0);
  if (f.size() != target.size() || f.size() != coords.size())
    throw Error(ErrorCode::RejectRange, "chart map has " + std::to_string(f.size()) + " components for " +
                                            std::to_string(coords.size()) + " coordinates and " +
                                            std::to_string(target.size()) + " targets");
  res.residual = detail::max_residual(f, target);
  res.history.push_back(res.residual);
  const int m = int(coords.size());
  for (int it = 0; it < opt.maxIter; ++it) {
    if (res.residual <= opt.tol) return res;
    Eigen::MatrixXd J(m, m);
    for (int j = 0; j < m; ++j) {
      FdResult d = fd_derivative(F, res.point, coords[j], 1, opt.fd);
      for (int i = 0; i < m; ++i) J(i, j) = d.value[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (m > 0 && !(sv(m - 1) > opt.singularRatio * sv(0)))
      throw Error(ErrorCode::NoProgress, "singular chart Jacobian at iteration " + std::to_string(it));
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) r(i) = target[i] - f[i];
    Eigen::VectorXd step = svd.solve(r);

    double lambda = 1.0;
    bool improved = false, anyValid = false;
    for (int h = 0; h <= opt.maxHalvings; ++h, lambda *= 0.5) {
      ModuliPoint trial = res.point;
      try {
        for (int j = 0; j < m; ++j) trial = shifted(trial, coords[j], lambda * step(j));
        std::vector<double> ft = F(trial);
        anyValid = true;
        double rt = detail::max_residual(ft, target);
        if (rt < res.residual) {
          for (const auto& c : coords)
            if (local_scale(trial, c) < opt.boundaryRatio * (1.0 + std::abs(coordinate_value(trial, c))))
              throw Error(ErrorCode::LeftModuli, "iterate approaches the moduli boundary along " + c.str());
          res.point = trial;
          f = ft;
          res.residual = rt;
          improved = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoProgress || e.code() == ErrorCode::LeftModuli) throw;
      }
    }
    if (!improved) {
      if (!anyValid) throw Error(ErrorCode::LeftModuli, "every damped step leaves the real moduli space");
      throw Error(ErrorCode::NoProgress, "no damped step reduces the chart residual (residual " +
                                             format_double(res.residual) + ")");
    }
    res.iterations = it + 1;
    res.history.push_back(res.residual);
  }
  if (res.residual <= opt.tol) return res;
  throw Error(ErrorCode::MaxIter, "chart residual " + format_double(res.residual) + " after " +
                                      std::to_string(opt.maxIter) + " iterations");
}

inline NewtonResult newton_to_rational(const ModuliPoint& p0, const ChartTarget& target,
                                       const NewtonOptions& opt = {},
                                       const EvalOptions& eval = variation_eval_options()) {
  return newton_solve(p0, period_chart(target, eval), target.values(), opt);
}

struct SpectralCandidate {
  ModuliPoint point;
  double sPlus = 0.0, sMinus = 0.0;
  std::vector<long> integerPeriodsPlus, integerPeriodsMinus;
  Complex tau;
  std::vector<std::pair<std::string, double>> residuals;
  int genus = 0;
};

namespace detail {
// Smallest s > 0 with s·v integral; entries bounded by maxInt.
inline std::pair<double, std::vector<long>> primitive_scaling(const std::vector<double>& v, long maxDen,
                                                              double tolRational, long maxInt, double& residual) {
  int chart = 0;
  for (int i = 1; i < int(v.size()); ++i)
    if (std::abs(v[i]) > std::abs(v[chart])) chart = i;
  if (v.empty() || v[chart] == 0.0) throw Error(ErrorCode::ZeroVector, "period vector vanishes");
  std::vector<Rational> r(v.size());
  long lcm = 1;
  for (int i = 0; i < int(v.size()); ++i) {
    double x = v[i] / v[chart];
    r[i] = i == chart ? Rational{1, 1} : best_rational(x, maxDen);
    if (std::abs(r[i].value() - x) > tolRational)
      throw Error(ErrorCode::NotRational, "ratio " + format_double(x) + " is not within " + format_double(tolRational) +
                                              " of a fraction with denominator <= " + std::to_string(maxDen));
    lcm = std::lcm(lcm, r[i].den);
    if (lcm > maxInt) throw Error(ErrorCode::Overflow, "common denominator exceeds " + std::to_string(maxInt));
  }
  std::vector<long> ints(v.size());
  long g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ints[i] = r[i].num * (lcm / r[i].den);
    g = std::gcd(g, std::labs(ints[i]));
  }
  for (auto& k : ints) {
    k /= g;
    if (std::labs(k) > maxInt) throw Error(ErrorCode::Overflow, "integer period exceeds " + std::to_string(maxInt));
  }
  if ((ints[chart] > 0) != (v[chart] > 0))
    for (auto& k : ints) k = -k;
  double s = double(ints[chart]) / v[chart];
  residual = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) residual = std::max(residual, std::abs(s * v[i] - double(ints[i])));
  return {s, ints};
}
}  // namespace detail

struct ScaleOptions {
  long maxInt = 1000;
  long maxDen = 50;
  double tolRational = 1e-9;
  EvalOptions eval = variation_eval_options();
};

inline SpectralCandidate scale_periods(const ModuliPoint& p, const std::vector<double>& plus,
                                       const std::vector<double>& minus, const ScaleOptions& opt = {}) {
  SpectralCandidate c;
  c.point = p;
  c.genus = p.genus();
  double rp = 0.0, rm = 0.0;
  std::tie(c.sPlus, c.integerPeriodsPlus) = detail::primitive_scaling(plus, opt.maxDen, opt.tolRational, opt.maxInt, rp);
  std::tie(c.sMinus, c.integerPeriodsMinus) =
      detail::primitive_scaling(minus, opt.maxDen, opt.tolRational, opt.maxInt, rm);
  c.tau = kI * c.sPlus / c.sMinus;
  c.residuals = {{"plus", rp}, {"minus", rm}};
  return c;
}

inline SpectralCandidate scale_and_type(const ModuliPoint& p, const ScaleOptions& opt = {}) {
  EvalOptions e = opt.eval;
  e.withHat = false;
  PeriodVector v = period_vectors(p, e);
  return scale_periods(p, v.plus, v.minus, opt);
}

inline Record to_record(const SpectralCandidate& c) {
  Record r = to_record(c.point, "candidate");
  r.add("genus", c.genus).add("sPlus", c.sPlus).add("sMinus", c.sMinus);
  r.add("intPlus", join_values(c.integerPeriodsPlus, ","));
  r.add("intMinus", join_values(c.integerPeriodsMinus, ","));
  r.add("tau", c.tau);
  for (const auto& [k, v] : c.residuals) r.add("res_" + k, v);
  return r;
}

inline SpectralCandidate candidate_from_record(const ParsedRecord& rec) {
  SpectralCandidate c;
  c.point = moduli_point_from_record(rec);
  c.genus = int(parse_long(rec.require("genus"), "genus"));
  c.sPlus = parse_double(rec.require("sPlus"), "sPlus");
  c.sMinus = parse_double(rec.require("sMinus"), "sMinus");
  for (const auto& s : split(rec.require("intPlus"), ',')) c.integerPeriodsPlus.push_back(parse_long(s, "intPlus"));
  for (const auto& s : split(rec.require("intMinus"), ',')) c.integerPeriodsMinus.push_back(parse_long(s, "intMinus"));
  c.tau = parse_complex(rec.require("tau"), "tau");
  for (const auto& [k, v] : rec.fields)
    if (k.rfind("res_", 0) == 0) c.residuals.emplace_back(k.substr(4), parse_double(v, k));
  return c;
}

inline SpectralCandidate candidate_from_record(const std::string& line) {
  return candidate_from_record(parse_record(line));
}

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool overall = false;

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct VerifyOptions {
  double tol = 1e-8;
  double unitTol = 1e-9;
  EvalOptions eval = variation_eval_options();
};

namespace detail {
// ∫ x^n Q(x + 1/x) dx / y over a loop of X around the preimage of [2, R];
// the loop covers a_0 on C_− twice.
inline Complex x_level_a0_period(const ModuliPoint& p, const SecondKindDifferential& omegaMinus,
                                 const QuadOptions& quad) {
  SpectralModel m = spectral_model(p, 0.0);
  BranchCurve X{m.xBranchPoints};
  double a = outer_root(p.R).real();
  double center = 0.5 * (a + 1.0 / a), half = 0.5 * (a - 1.0 / a);
  double radius = half + 0.5 * (1.0 / a);
  PlanarPath loop;
  loop.segments.push_back(Segment::arc(center, radius, 0.0, 2.0 * kPi));
  loop.closed = true;
  Complex x0 = center + radius;
  Complex w0 = std::sqrt(X.P(x0));
  int n = p.n;
  auto f = [&](Complex x, Complex* out) { out[0] = std::pow(x, n) * omegaMinus.numerator(x + 1.0 / x); };
  return integrate_many(X, loop, w0, 1, f, quad).values[0];
}
}  // namespace detail

inline VerificationReport verify_candidate(const SpectralCandidate& c, const VerifyOptions& opt = {}) {
  VerificationReport rep;
  const double inf = std::numeric_limits<double>::infinity();
  auto add = [&](std::string name, bool pass, double residual, std::string detail = {}) {
    rep.checks.push_back({std::move(name), pass, residual, std::move(detail)});
  };
  const ModuliPoint& p = c.point;

  std::optional<SpectralModel> model;
  try {
    model = spectral_model(p, 0.0);
  } catch (const Error& e) {
    add("a_reality_no_unit_branch", false, inf, e.what());
    add("b_simple_zero_and_infinity", false, inf, e.what());
  }
  // (a) branch set of X closed under x ↦ 1/x̄, none on |x| = 1
  if (model) {
    const SpectralModel& m = *model;
    double closure = 0.0, unit = inf;
    for (const Complex& b : m.xBranchPoints) {
      if (b == 0.0) continue;
      Complex image = 1.0 / std::conj(b);
      double best = inf;
      for (const Complex& o : m.xBranchPoints) best = std::min(best, std::abs(o - image));
      closure = std::max(closure, best / std::max(1.0, std::abs(image)));
      unit = std::min(unit, std::abs(std::abs(b) - 1.0));
    }
    bool pass = closure <= opt.tol && unit > opt.unitTol;
    add("a_reality_no_unit_branch", pass, unit > opt.unitTol ? closure : inf,
        "min ||x|-1| = " + format_double(unit));
  }
  // (b) simple zero at x = 0, odd degree so ∞ is a simple branch point
  if (model) {
    const SpectralModel& m = *model;
    int zeros = 0;
    double nearest = inf;
    for (const Complex& b : m.xBranchPoints) {
      if (b == 0.0) ++zeros;
      else nearest = std::min(nearest, std::abs(b));
    }
    bool pass = zeros == 1 && nearest > opt.unitTol && m.xBranchPoints.size() % 2 == 1;
    add("b_simple_zero_and_infinity", pass, pass ? 0.0 : inf,
        "degree " + std::to_string(m.xBranchPoints.size()));
  }
  // (c) integrality of s_±·I_±, including the open-curve entries
  // (d) σ-oddness and ρ-reality
  std::optional<PeriodData> data;
  try {
    EvalOptions e = opt.eval;
    e.withHat = false;
    data = evaluate(p, e);
  } catch (const Error& e) {
    add("c_integrality", false, inf, e.what());
    add("d_sigma_rho", false, inf, e.what());
  }
  if (data) {
    const auto& I = data->periods;
    double r = 0.0;
    bool shape = I.plus.size() == c.integerPeriodsPlus.size() && I.minus.size() == c.integerPeriodsMinus.size();
    if (shape) {
      for (std::size_t i = 0; i < I.plus.size(); ++i)
        r = std::max(r, std::abs(c.sPlus * I.plus[i] - double(c.integerPeriodsPlus[i])));
      for (std::size_t i = 0; i < I.minus.size(); ++i)
        r = std::max(r, std::abs(c.sMinus * I.minus[i] - double(c.integerPeriodsMinus[i])));
    }
    add("c_integrality", shape && r <= opt.tol, shape ? r : inf, shape ? "" : "period vector length mismatch");
    try {
      SymmetryResiduals sym = symmetry_residuals(p, opt.eval);
      double s = std::max({sym.sigma, sym.rho, I.realnessResidual});
      add("d_sigma_rho", s <= opt.tol, s);
    } catch (const Error& e) {
      add("d_sigma_rho", false, inf, e.what());
    }
  }
  // (e) principal parts independent over ℝ
  {
    bool finite = std::isfinite(c.tau.real()) && std::isfinite(c.tau.imag());
    double re = finite ? std::abs(c.tau.real()) : inf;
    bool pass = c.sPlus != 0.0 && c.sMinus != 0.0 && finite && c.tau.imag() != 0.0 &&
                re <= opt.tol * std::abs(c.tau);
    double expected = std::abs(c.tau - kI * c.sPlus / c.sMinus);
    pass = pass && expected <= opt.tol * std::max(1.0, std::abs(c.tau));
    add("e_independent_tau", pass, std::max(re, expected));
  }
  // (f) conformality: P(0) = 0
  if (model) {
    const SpectralModel& m = *model;
    add("f_conformal", m.hasZeroBranch && std::abs(m.P(0.0)) == 0.0, std::abs(m.P(0.0)));
  } else {
    add("f_conformal", false, inf, "no spectral model");
  }
  // X-level a_0 period for n = 0 (odd family)
  if (p.family == Family::Odd && p.n == 0 && data && !p.degeneration) {
    Complex v = detail::x_level_a0_period(p, data->omegaMinus, opt.eval.quad);
    add("g_x_level_a0", std::abs(v) <= opt.tol, std::abs(v));
  }

  rep.overall = !rep.checks.empty();
  for (const auto& ch : rep.checks) rep.overall = rep.overall && ch.pass;
  return rep;
}

inline std::vector<Record> to_records(const VerificationReport& rep) {
  std::vector<Record> out;
  for (const auto& c : rep.checks) {
    Record r("check");
    r.add("name", c.name).add("pass", c.pass).add("residual", c.residual);
    if (!c.detail.empty()) {
      std::string d = c.detail;
      std::replace(d.begin(), d.end(), ' ', '_');
      r.add("detail", d);
    }
    out.push_back(r);
  }
  Record o("verification");
  o.add("overall", rep.overall);
  out.push_back(o);
  return out;
}

}  // namespace spectori
