#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "periods.hpp"

namespace spectori {

enum class CoordKind { R, ReLambda, ImLambda, Mu, Nu };

struct Coordinate {
  CoordKind kind = CoordKind::R;
  int pair = 0;

  std::string str() const {
    switch (kind) {
      case CoordKind::R: return "R";
      case CoordKind::ReLambda: return "ReLambda" + std::to_string(pair + 1);
      case CoordKind::ImLambda: return "ImLambda" + std::to_string(pair + 1);
      case CoordKind::Mu: return "mu";
      case CoordKind::Nu: return "nu";
    }
    return "?";
  }
};

// R (odd family) followed by Re/Im of each pair.
inline std::vector<Coordinate> moduli_coordinates(const ModuliPoint& p) {
  std::vector<Coordinate> out;
  if (p.family == Family::Odd) out.push_back({CoordKind::R, 0});
  for (int i = 0; i < p.n; ++i) {
    out.push_back({CoordKind::ReLambda, i});
    out.push_back({CoordKind::ImLambda, i});
  }
  return out;
}

inline double coordinate_value(const ModuliPoint& p, Coordinate c) {
  switch (c.kind) {
    case CoordKind::R: return p.R;
    case CoordKind::ReLambda: return p.upper(c.pair).real();
    case CoordKind::ImLambda: return p.upper(c.pair).imag();
    case CoordKind::Mu: return p.degeneration ? p.degeneration->mu : 0.0;
    case CoordKind::Nu: return p.degeneration ? p.degeneration->nu : 0.0;
  }
  return 0.0;
}

// Moves one real coordinate; conjugate pairs move together.
inline ModuliPoint shifted(const ModuliPoint& p, Coordinate c, double h) {
  ModuliPoint q = p;
  switch (c.kind) {
    case CoordKind::R: q.R += h; break;
    case CoordKind::ReLambda:
    case CoordKind::ImLambda: {
      Complex d = c.kind == CoordKind::ReLambda ? Complex(h, 0.0) : Complex(0.0, h);
      q.lambdas[2 * c.pair] += d;
      q.lambdas[2 * c.pair + 1] = q.realForm ? std::conj(q.lambdas[2 * c.pair]) : q.lambdas[2 * c.pair + 1] + d;
      break;
    }
    case CoordKind::Mu:
    case CoordKind::Nu:
      if (!q.degeneration) throw Error(ErrorCode::Degenerate, "point has no (mu, nu) coordinates");
      (c.kind == CoordKind::Mu ? q.degeneration->mu : q.degeneration->nu) += h;
      break;
  }
  return validate_moduli_point(q);
}

// Distance from the values moved by the coordinate to every other branch value.
inline double local_scale(const ModuliPoint& p, Coordinate c) {
  std::vector<Complex> fixed{-2.0, 2.0}, moving;
  if (p.family == Family::Odd) (c.kind == CoordKind::R ? moving : fixed).push_back(p.R);
  for (int i = 0; i < p.n; ++i) {
    bool mine = (c.kind == CoordKind::ReLambda || c.kind == CoordKind::ImLambda) && c.pair == i;
    auto& dst = mine ? moving : fixed;
    dst.push_back(p.lambdas[2 * i]);
    dst.push_back(p.lambdas[2 * i + 1]);
  }
  double own = std::numeric_limits<double>::infinity();
  if (p.degeneration) {
    const auto& d = *p.degeneration;
    bool mine = c.kind == CoordKind::Mu || c.kind == CoordKind::Nu;
    auto& dst = mine ? moving : fixed;
    dst.push_back({d.mu, d.nu});
    if (d.nu != 0.0) dst.push_back({d.mu, -d.nu});
    if (c.kind == CoordKind::Nu && d.nu != 0.0) own = 2.0 * d.nu;
  }
  if (c.kind == CoordKind::ImLambda) own = 2.0 * p.upper(c.pair).imag();
  double s = own;
  for (const auto& m : moving)
    for (const auto& f : fixed) s = std::min(s, std::abs(m - f));
  return std::min(s, 1.0 + std::abs(coordinate_value(p, c)));
}

using Evaluator = std::function<std::vector<double>(const ModuliPoint&)>;

enum class FdScheme { Central, Forward };

struct FdOptions {
  double relStep = 1e-5;        // first order, times local_scale
  double relStepSecond = 2e-2;  // second order, times local_scale
  double step = 0.0;            // absolute override when positive
  double noiseLevel = 1e-12;    // absolute error of one evaluation
  FdScheme scheme = FdScheme::Central;
};

struct FdResult {
  std::vector<double> value;
  double step = 0.0;
  double richardsonGap = 0.0;  // max |level(h/2) − level(h)|
  double noise = 0.0;          // evaluation noise propagated to one level
};

namespace detail {
inline std::vector<double> combine(const std::vector<double>& a, double ca, const std::vector<double>& b, double cb) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  return out;
}
inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace detail

// Central (or forward) difference with one Richardson step.
inline FdResult fd_derivative(const Evaluator& f, const ModuliPoint& p, Coordinate c, int order,
                              const FdOptions& opt = {}) {
  if (order != 1 && order != 2) throw Error(ErrorCode::StepTooSmall, "derivative order must be 1 or 2");
  double h = opt.step > 0.0 ? opt.step
                            : (order == 1 ? opt.relStep : opt.relStepSecond) * local_scale(p, c);
  FdResult res;
  res.step = h;
  auto level = [&](double s) -> std::vector<double> {
    if (order == 1 && opt.scheme == FdScheme::Forward) {
      auto up = f(shifted(p, c, s)), mid = f(p);
      return detail::combine(up, 1.0 / s, mid, -1.0 / s);
    }
    auto up = f(shifted(p, c, s)), down = f(shifted(p, c, -s));
    if (order == 1) return detail::combine(up, 0.5 / s, down, -0.5 / s);
    auto mid = f(p);
    std::vector<double> out(up.size());
    for (std::size_t i = 0; i < up.size(); ++i) out[i] = (up[i] - 2.0 * mid[i] + down[i]) / (s * s);
    return out;
  };
  auto big = level(h), small = level(0.5 * h);
  // Forward differences have an O(h) leading error, the others O(h²).
  double k = (order == 1 && opt.scheme == FdScheme::Forward) ? 2.0 : 4.0;
  res.value = detail::combine(small, k / (k - 1.0), big, -1.0 / (k - 1.0));
  res.richardsonGap = detail::max_abs_diff(small, big);
  res.noise = order == 1 ? opt.noiseLevel / (0.5 * h) : 4.0 * opt.noiseLevel / (0.25 * h * h);
  double scale = std::max(1.0, detail::max_abs(res.value));
  if (res.richardsonGap > 1e-3 * scale && res.noise > 0.1 * res.richardsonGap)
    throw Error(ErrorCode::StepTooSmall, "Richardson levels differ by " + format_double(res.richardsonGap) +
                                             " at noise level " + format_double(res.noise));
  return res;
}

inline Evaluator period_evaluator(const EvalOptions& opt = {}) {
  EvalOptions o = opt;
  o.withHat = false;
  return [o](const ModuliPoint& q) { return period_vectors(q, o).stacked(); };
}

// Options for derivative work: tighter quadrature than plain evaluation.
inline EvalOptions variation_eval_options(double quadTol = 1e-13) {
  EvalOptions o;
  o.quad.absTol = quadTol;
  o.quad.relTol = 1e-15;
  return o;
}

struct SpanMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  int rank = 0;
  double conditionNumber = 0.0;
  double determinant = 0.0;  // raw rows, square case only
  std::vector<double> singularValues;
};

inline SpanMatrix make_span(std::vector<std::string> labels, std::vector<std::vector<double>> rows,
                            double rankTol = 1e-9) {
  SpanMatrix S;
  S.labels = std::move(labels);
  S.rows = std::move(rows);
  int r = int(S.rows.size()), c = r ? int(S.rows[0].size()) : 0;
  Eigen::MatrixXd A(r, c), N(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) A(i, j) = S.rows[i][j];
    double nrm = A.row(i).norm();
    N.row(i) = nrm > 0 ? (A.row(i) / nrm).eval() : A.row(i);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(N);
  const auto& s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) {
    S.singularValues.push_back(s(i));
    if (s(i) > rankTol * s(0)) ++S.rank;
  }
  S.conditionNumber = s.size() && s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1)
                                                       : std::numeric_limits<double>::infinity();
  if (r == c && r > 0) S.determinant = A.determinant();
  return S;
}

namespace detail {
inline std::vector<double> padded(const std::vector<double>& plus, std::size_t np, const std::vector<double>& minus,
                                  std::size_t nm, bool plusPart) {
  std::vector<double> v(np + nm, 0.0);
  if (plusPart)
    std::copy(plus.begin(), plus.end(), v.begin());
  else
    std::copy(minus.begin(), minus.end(), v.begin() + np);
  return v;
}
}  // namespace detail

inline std::vector<std::vector<double>> moduli_derivatives(const ModuliPoint& p, const EvalOptions& eval,
                                                           const FdOptions& fd = {}) {
  Evaluator f = period_evaluator(eval);
  FdOptions o = fd;
  o.noiseLevel = std::max(o.noiseLevel, 10.0 * eval.quad.absTol);
  std::vector<std::vector<double>> cols;
  for (Coordinate c : moduli_coordinates(p.base())) cols.push_back(fd_derivative(f, p, c, 1, o).value);
  return cols;
}

inline SpanMatrix span_rank(const ModuliPoint& p, const EvalOptions& eval = variation_eval_options(),
                            const FdOptions& fd = {}) {
  PeriodVector pv = period_vectors(p, eval);
  std::size_t np = pv.plus.size(), nm = pv.minus.size();
  std::vector<std::string> labels{"I+", "I-"};
  std::vector<std::vector<double>> rows{detail::padded(pv.plus, np, pv.minus, nm, true),
                                        detail::padded(pv.plus, np, pv.minus, nm, false)};
  auto cols = moduli_derivatives(p, eval, fd);
  auto coords = moduli_coordinates(p.base());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    labels.push_back("d" + coords[k].str());
    rows.push_back(cols[k]);
  }
  return make_span(std::move(labels), std::move(rows));
}

// Rows (I_+,0), (0,I_−), ∂_R, ∂_λ, ∂_μ, ∂²_ν of (I_+; I_−) at (p, μ, 0).
inline SpanMatrix h_matrix(const ModuliPoint& p0, const EvalOptions& eval = variation_eval_options(),
                           const FdOptions& fd = {}) {
  if (!p0.is_degenerate()) throw Error(ErrorCode::Degenerate, "H(mu) needs a point (p, mu, 0)");
  SpanMatrix S = span_rank(p0, eval, fd);
  Evaluator f = period_evaluator(eval);
  FdOptions o = fd;
  o.noiseLevel = std::max(o.noiseLevel, 10.0 * eval.quad.absTol);
  S.labels.push_back("dmu");
  S.rows.push_back(fd_derivative(f, p0, {CoordKind::Mu, 0}, 1, o).value);
  S.labels.push_back("d2nu");
  S.rows.push_back(fd_derivative(f, p0, {CoordKind::Nu, 0}, 2, o).value);
  return make_span(std::move(S.labels), std::move(S.rows));
}

struct InvariantResult {
  PeriodData data;
  InvariantSet invariants;
};

inline InvariantResult compute_invariants(const ModuliPoint& p, const EvalOptions& eval = variation_eval_options(),
                                          const FdOptions& fd = {}) {
  InvariantResult r;
  r.data = evaluate(p, eval);
  r.invariants = invariant_set(r.data, moduli_derivatives(p, eval, fd));
  return r;
}

// κ of the holomorphic differential ω = κ Π(z − β_j) dz / w on C_±(p, μ, ν)
// with vanishing a-periods except ∫ω = 2πi over the cycle around the added pair.
inline Complex kappa(const ModuliPoint& p, double mu, double nu, CurveSign s, const QuadOptions& quad = {}) {
  ModuliPoint base = p.base();
  CycleSystem cs = canonical_contours(base, 0.0, false);
  BranchCurve bc = analytic_curve(pick(quotient_curves(base), s));
  std::vector<LiftedCycle> a = cs.on(s).a;
  int d = int(a.size());
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& r : bc.roots) dist = std::min(dist, std::abs(Complex(mu, 0.0) - r));
  nu = std::abs(nu);
  if (!(dist > 2.0 * nu)) throw Error(ErrorCode::TooSmall, "added pair too close to the branch points");

  BranchCurve curve = bc;
  LiftedCycle extra;
  Complex wRef = principal_fiber(bc, mu + 0.5 * dist);
  std::function<Complex(Complex)> weight;
  if (nu == 0.0) {
    extra = small_loop(mu, 0.5 * dist, wRef, bc, s, base.family);
    weight = [mu](Complex z) { return 1.0 / (z - mu); };
  } else {
    curve.roots.push_back({mu, nu});
    curve.roots.push_back({mu, -nu});
    double half = 0.5 * (dist - nu);
    extra.path = paths::vertical_stadium(mu, nu, half, 0.5 * half);
    Complex z0 = extra.path.start();
    extra.startFiber = nearest_sqrt(curve.P(z0), (z0 - mu) * principal_fiber(bc, z0));
    for (auto& c : a) c.startFiber = std::sqrt(curve.P(c.path.start()));
    weight = [](Complex) { return Complex(1.0); };
  }
  a.push_back(extra);
  auto f = [&](Complex z, Complex* out) {
    Complex p = weight(z);
    for (int k = 0; k <= d; ++k, p *= z) out[k] = p;
  };
  Eigen::MatrixXcd M(d + 1, d + 1);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d + 1);
  for (int i = 0; i <= d; ++i) {
    auto v = integrate_many(curve, a[i].path, a[i].startFiber, d + 1, f, quad).values;
    for (int k = 0; k <= d; ++k) M(i, k) = v[k];
  }
  rhs(d) = 2.0 * kPi * kI;
  Eigen::VectorXcd N = detail::solve_checked(M, rhs, "kappa system");
  return N(d);
}

enum class AsymptoticQuantity { BNextPeriod, HatBNext, Kappa, NuSecond };

inline const char* to_string(AsymptoticQuantity q) {
  switch (q) {
    case AsymptoticQuantity::BNextPeriod: return "B_NEXT_PERIOD";
    case AsymptoticQuantity::HatBNext: return "HAT_B_NEXT";
    case AsymptoticQuantity::Kappa: return "KAPPA";
    case AsymptoticQuantity::NuSecond: return "NU_SECOND";
  }
  return "?";
}

struct AsymptoticSample {
  double mu = 0.0;
  Complex value;
  Complex predicted;  // first two predicted terms (or the target value for KAPPA)
  double residual = 0.0;
  double scaledResidual = 0.0;  // residual / μ^{expected order}
  Complex nextCoefficient;      // (value − leading term)/μ^{next order}
};

struct AsymptoticFit {
  AsymptoticQuantity quantity = AsymptoticQuantity::BNextPeriod;
  CurveSign sign = CurveSign::Plus;
  std::vector<AsymptoticSample> samples;
  Complex unit{1.0};  // overall sign that matched
  Complex fittedLeading;
  double fittedOrder = 0.0;     // log-log slope of the residual
  double expectedOrder = 0.0;   // predicted order of the residual
  double residualBound = 0.0;   // max scaled residual
  Complex predictedNext;        // predicted next coefficient
};

struct ProbeOptions {
  QuadOptions quad;
  double eta = 0.0;  // η^± of p, used by HAT_B_NEXT
  double nuRelStep = 2e-2;

  ProbeOptions() {
    quad.absTol = 1e-13;
    quad.relTol = 1e-14;
  }
};

inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline AsymptoticFit asymptotic_probe(const ModuliPoint& point, AsymptoticQuantity quantity, CurveSign s,
                                      const std::vector<double>& muList, const ProbeOptions& opt = {}) {
  ModuliPoint p = point.base();
  EvalOptions eval;
  eval.quad = opt.quad;
  eval.withHat = quantity == AsymptoticQuantity::HatBNext;
  PeriodData data = evaluate(p, eval);
  const double D = (s == CurveSign::Plus ? data.Dplus : data.Dminus).real();
  BranchCurve curve = analytic_curve(pick(quotient_curves(p), s));

  AsymptoticFit fit;
  fit.quantity = quantity;
  fit.sign = s;
  std::vector<Complex> raw;
  for (double mu : muList) {
    AsymptoticSample smp;
    smp.mu = mu;
    switch (quantity) {
      case AsymptoticQuantity::BNextPeriod:
      case AsymptoticQuantity::Kappa: {
        LiftedCycle g = large_circle(p, mu, s);
        Complex period = integrate_differential(curve, g, data.omega(s), opt.quad);
        if (quantity == AsymptoticQuantity::BNextPeriod) {
          smp.value = period;
          smp.predicted = 4.0 * std::sqrt(mu) - 4.0 * D / std::sqrt(mu);
        } else {
          smp.value = 4.0 * kappa(p, mu, 0.0, s, opt.quad);
          smp.predicted = period;
        }
        break;
      }
      case AsymptoticQuantity::HatBNext: {
        LiftedCycle g = large_circle(p, mu, s);
        auto v = integrate_differentials(curve, g, {&data.omega(s), &data.hat(s)}, opt.quad);
        smp.value = v[1] - opt.eta * v[0];
        smp.predicted = 2.0 * std::pow(mu, 1.5) + (6.0 * D - 4.0 * opt.eta) * std::sqrt(mu);
        break;
      }
      case AsymptoticQuantity::NuSecond: {
        double rmax = 0.0;
        for (const auto& r : curve.roots) rmax = std::max(rmax, std::abs(r));
        if (!(mu > rmax)) throw Error(ErrorCode::TooSmall, "mu does not exceed the branch points");
        double h = opt.nuRelStep * (mu - rmax);
        auto k0 = kappa(p, mu, 0.0, s, opt.quad);
        auto second = [&](double step) { return 2.0 * (kappa(p, mu, step, s, opt.quad) - k0) / (step * step); };
        Complex big = second(h), small = second(0.5 * h);
        smp.value = 4.0 * (4.0 * small - big) / 3.0;
        smp.predicted = 1.5 * std::pow(mu, -1.5) + 4.5 * D * std::pow(mu, -2.5);
        break;
      }
    }
    raw.push_back(smp.value);
    fit.samples.push_back(smp);
  }

  // Overall sign: the unit in {±1, ±i} best aligned with value/predicted.
  Complex ratio = raw.back() / fit.samples.back().predicted;
  Complex best = 1.0;
  for (Complex u : {Complex(1.0), Complex(-1.0), kI, -kI})
    if (std::abs(ratio - u) < std::abs(ratio - best)) best = u;
  fit.unit = best;

  double leadOrder = 0.0, nextOrder = 0.0;
  switch (quantity) {
    case AsymptoticQuantity::BNextPeriod: leadOrder = 0.5, nextOrder = -0.5, fit.expectedOrder = -1.5; break;
    case AsymptoticQuantity::HatBNext: leadOrder = 1.5, nextOrder = 0.5, fit.expectedOrder = -0.5; break;
    case AsymptoticQuantity::Kappa: leadOrder = 0.5, nextOrder = -0.5, fit.expectedOrder = -1.5; break;
    case AsymptoticQuantity::NuSecond: leadOrder = -1.5, nextOrder = -2.5, fit.expectedOrder = -3.5; break;
  }
  Complex leadCoef = quantity == AsymptoticQuantity::HatBNext ? 2.0 : (quantity == AsymptoticQuantity::NuSecond ? 1.5 : 4.0);
  fit.predictedNext = quantity == AsymptoticQuantity::HatBNext   ? Complex(6.0 * D - 4.0 * opt.eta)
                      : quantity == AsymptoticQuantity::NuSecond ? Complex(4.5 * D)
                                                                 : Complex(-4.0 * D);
  std::vector<double> mus, res;
  for (auto& smp : fit.samples) {
    Complex v = smp.value / fit.unit;
    smp.value = v;
    smp.residual = std::abs(v - smp.predicted);
    smp.scaledResidual = smp.residual / std::pow(smp.mu, fit.expectedOrder);
    smp.nextCoefficient = (v - leadCoef * std::pow(smp.mu, leadOrder)) / std::pow(smp.mu, nextOrder);
    fit.residualBound = std::max(fit.residualBound, smp.scaledResidual);
    mus.push_back(smp.mu);
    res.push_back(std::max(smp.residual, 1e-300));
  }
  fit.fittedLeading = fit.samples.back().value / std::pow(fit.samples.back().mu, leadOrder);
  fit.fittedOrder = mus.size() >= 2 ? log_log_slope(mus, res) : 0.0;
  return fit;
}

}  // namespace spectori
