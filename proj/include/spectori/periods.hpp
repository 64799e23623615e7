#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "homology.hpp"

namespace spectori {

// Q(z) dz / w with Q = Π(z − ζ_j), or for hat forms
// Q(z)·((3/2)z + Σ c_j/(z − ζ_j)) dz / w.
struct SecondKindDifferential {
  CurveSign curveSign = CurveSign::Plus;
  std::vector<Complex> zetas;
  Poly coefficients{1.0};
  std::vector<Complex> hatCoefficients;
  bool isHat = false;
  double aPeriodResidual = 0.0;
  bool zetasDistinct = true;

  Complex numerator(Complex z) const {
    Complex q = product_eval(zetas, z);
    if (!isHat) return q;
    Complex r = 1.5 * z * q;
    for (std::size_t j = 0; j < zetas.size(); ++j) {
      Complex part = hatCoefficients[j];
      for (std::size_t k = 0; k < zetas.size(); ++k)
        if (k != j) part *= (z - zetas[k]);
      r += part;
    }
    return r;
  }
};

inline Complex prefactor(Family f, CurveSign s) {
  bool prefixed = (f == Family::Odd) == (s == CurveSign::Plus);
  return prefixed ? kI : Complex(1.0);
}

inline std::vector<Complex> integrate_differentials(const BranchCurve& curve, const LiftedCycle& cycle,
                                                    const std::vector<const SecondKindDifferential*>& forms,
                                                    const QuadOptions& quad = {}) {
  int m = int(forms.size());
  auto f = [&](Complex z, Complex* out) {
    for (int i = 0; i < m; ++i) out[i] = forms[i]->numerator(z);
  };
  return integrate_many(curve, cycle.path, cycle.startFiber, m, f, quad).values;
}

inline Complex integrate_differential(const BranchCurve& curve, const LiftedCycle& cycle,
                                      const SecondKindDifferential& form, const QuadOptions& quad = {}) {
  return integrate_differentials(curve, cycle, {&form}, quad)[0];
}

// ∫ Π(z − r) dz / w over the cycle, without prefactors.
inline Complex integrate(const std::vector<Complex>& numeratorRoots, const BranchCurve& curve,
                         const LiftedCycle& cycle, const QuadOptions& quad = {}) {
  auto f = [&](Complex z, Complex* out) { out[0] = product_eval(numeratorRoots, z); };
  return integrate_many(curve, cycle.path, cycle.startFiber, 1, f, quad).values[0];
}

inline std::vector<Complex> cycle_moments(const BranchCurve& curve, const LiftedCycle& cycle, int maxDeg,
                                          const QuadOptions& quad = {}) {
  auto f = [&](Complex z, Complex* out) {
    Complex p = 1.0;
    for (int k = 0; k <= maxDeg; ++k, p *= z) out[k] = p;
  };
  return integrate_many(curve, cycle.path, cycle.startFiber, maxDeg + 1, f, quad).values;
}

namespace detail {

inline bool distinct(const std::vector<Complex>& z, double tol) {
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j)
      if (std::abs(z[i] - z[j]) <= tol * (1.0 + std::abs(z[i]))) return false;
  return true;
}

inline Eigen::VectorXcd solve_checked(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& rhs, const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s.size() > 0 && !(s(s.size() - 1) > 1e-13 * s(0)))
    throw Error(ErrorCode::SingularSystem, std::string(what) + " is singular");
  return svd.solve(rhs);
}

}  // namespace detail

inline SecondKindDifferential normalize_second_kind(const BranchCurve& curve, CurveSign sign,
                                                    const std::vector<LiftedCycle>& aCycles,
                                                    const QuadOptions& quad = {}) {
  int deg = int(curve.roots.size());
  int d = (deg - 1) / 2;
  if (deg % 2 == 0 || int(aCycles.size()) != d)
    throw Error(ErrorCode::WrongDegree, "expected " + std::to_string(d) + " a-cycles, got " +
                                            std::to_string(aCycles.size()));
  SecondKindDifferential out;
  out.curveSign = sign;
  if (d == 0) return out;
  Eigen::MatrixXcd M(d, d + 1);
  for (int i = 0; i < d; ++i) {
    auto mom = cycle_moments(curve, aCycles[i], d, quad);
    for (int k = 0; k <= d; ++k) M(i, k) = mom[k];
  }
  Eigen::VectorXcd q = detail::solve_checked(M.leftCols(d), -M.col(d), "a-period system");
  out.coefficients.assign(q.data(), q.data() + d);
  out.coefficients.push_back(1.0);
  out.zetas = poly_roots(out.coefficients);
  Eigen::VectorXcd full(d + 1);
  for (int k = 0; k <= d; ++k) full(k) = out.coefficients[k];
  out.aPeriodResidual = (M * full).cwiseAbs().maxCoeff();
  out.zetasDistinct = detail::distinct(out.zetas, 1e-8);
  return out;
}

inline SecondKindDifferential hat_differential(const BranchCurve& curve, const SecondKindDifferential& omega,
                                               const std::vector<LiftedCycle>& aCycles,
                                               const QuadOptions& quad = {}) {
  SecondKindDifferential hat = omega;
  hat.isHat = true;
  int d = int(omega.zetas.size());
  hat.hatCoefficients.assign(d, 0.0);
  if (d == 0) return hat;
  if (!omega.zetasDistinct) throw Error(ErrorCode::RepeatedZeta, "numerator roots are not pairwise distinct");
  // Columns: (3/2) z Q, then Q/(z − ζ_j).
  auto f = [&](Complex z, Complex* out) {
    out[0] = 1.5 * z * product_eval(omega.zetas, z);
    for (int j = 0; j < d; ++j) {
      Complex part = 1.0;
      for (int k = 0; k < d; ++k)
        if (k != j) part *= (z - omega.zetas[k]);
      out[j + 1] = part;
    }
  };
  Eigen::MatrixXcd M(d, d + 1);
  for (int i = 0; i < d; ++i) {
    auto v = integrate_many(curve, aCycles[i].path, aCycles[i].startFiber, d + 1, f, quad).values;
    for (int k = 0; k <= d; ++k) M(i, k) = v[k];
  }
  Eigen::VectorXcd c = detail::solve_checked(M.rightCols(d), -M.col(0), "hat coefficient system");
  hat.hatCoefficients.assign(c.data(), c.data() + d);
  Eigen::VectorXcd full(d + 1);
  full(0) = 1.0;
  full.tail(d) = c;
  hat.aPeriodResidual = (M * full).cwiseAbs().maxCoeff();
  return hat;
}

struct PeriodVector {
  std::vector<double> plus, minus;
  std::vector<double> hatPlus, hatMinus;
  std::vector<Complex> rawPlus, rawMinus;
  std::vector<Complex> rawHatPlus, rawHatMinus;
  double realnessResidual = 0.0;
  bool hasHat = false;

  std::vector<double> stacked() const {
    std::vector<double> v = plus;
    v.insert(v.end(), minus.begin(), minus.end());
    return v;
  }
  std::vector<double> stacked_hat() const {
    std::vector<double> v = hatPlus;
    v.insert(v.end(), hatMinus.begin(), hatMinus.end());
    return v;
  }
};

struct EvalOptions {
  double delta = 0.0;
  QuadOptions quad;
  bool withHat = true;
};

struct PeriodData {
  ModuliPoint point;
  PeriodVector periods;
  SecondKindDifferential omegaPlus, omegaMinus, hatPlus, hatMinus;
  Complex Dplus, Dminus;
  double aPeriodResidual = 0.0;

  const SecondKindDifferential& omega(CurveSign s) const { return s == CurveSign::Plus ? omegaPlus : omegaMinus; }
  const SecondKindDifferential& hat(CurveSign s) const { return s == CurveSign::Plus ? hatPlus : hatMinus; }
};

// Cycles whose periods make up I_±, in vector order.
inline std::vector<const LiftedCycle*> period_cycles(const CycleSystem& cs, CurveSign s) {
  std::vector<const LiftedCycle*> out;
  const CurveCycles& cc = cs.on(s);
  if (cs.family == Family::Odd) {
    if (s == CurveSign::Plus) {
      out.push_back(&cs.c(1));
      out.push_back(&cs.c(-1));
    }
  } else {
    out.push_back(&cs.c(s == CurveSign::Plus ? 1 : -1));
  }
  for (const auto& b : cc.b) out.push_back(&b);
  return out;
}

inline PeriodData evaluate(const ModuliPoint& p, const EvalOptions& opt = {}) {
  const bool degenerate = p.is_degenerate();
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  if (!q.realForm) throw Error(ErrorCode::Degenerate, "period vectors need a real-form point");
  CycleSystem cs = canonical_contours(q, opt.delta, false);
  auto curves = quotient_curves(q);

  PeriodData out;
  out.point = p;
  out.periods.hasHat = opt.withHat && !degenerate;
  double realness = 0.0;
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    BranchCurve curve = analytic_curve(pick(curves, s));
    const CurveCycles& cc = cs.on(s);
    SecondKindDifferential omega = normalize_second_kind(curve, s, cc.a, opt.quad);
    SecondKindDifferential hat;
    std::vector<const SecondKindDifferential*> forms{&omega};
    if (out.periods.hasHat) {
      hat = hat_differential(curve, omega, cc.a, opt.quad);
      forms.push_back(&hat);
    }
    std::vector<LiftedCycle> extra;
    auto cycles = period_cycles(cs, s);
    if (degenerate) {
      extra.push_back(degenerate_b_cycle(p, s, opt.delta));
      cycles.push_back(&extra.back());
    }
    Complex pre = prefactor(p.family, s);
    auto& raw = s == CurveSign::Plus ? out.periods.rawPlus : out.periods.rawMinus;
    auto& val = s == CurveSign::Plus ? out.periods.plus : out.periods.minus;
    auto& rawHat = s == CurveSign::Plus ? out.periods.rawHatPlus : out.periods.rawHatMinus;
    auto& valHat = s == CurveSign::Plus ? out.periods.hatPlus : out.periods.hatMinus;
    for (const LiftedCycle* c : cycles) {
      auto v = integrate_differentials(curve, *c, forms, opt.quad);
      // At (p, μ, 0) the lifts are limits of those at (p, μ, ν); a sheet fixed
      // left of μ picks up the sign of z − μ.
      if (degenerate && c->anchor < p.degeneration->mu)
        for (auto& x : v) x = -x;
      raw.push_back(v[0]);
      val.push_back((pre * v[0]).real());
      realness = std::max(realness, std::abs((pre * v[0]).imag()));
      if (out.periods.hasHat) {
        rawHat.push_back(v[1]);
        valHat.push_back((pre * v[1]).real());
        realness = std::max(realness, std::abs((pre * v[1]).imag()));
      }
    }
    Complex D = infinity_expansion(omega.zetas, curve.roots).D;
    out.aPeriodResidual = std::max({out.aPeriodResidual, omega.aPeriodResidual, hat.aPeriodResidual});
    if (s == CurveSign::Plus) {
      out.omegaPlus = omega;
      out.hatPlus = hat;
      out.Dplus = D;
    } else {
      out.omegaMinus = omega;
      out.hatMinus = hat;
      out.Dminus = D;
    }
  }
  out.periods.realnessResidual = realness;
  return out;
}

struct SymmetryResiduals {
  double sigma = 0.0;  // max |∫_{σc} Ω + ∫_c Ω|
  double rho = 0.0;    // max |∫_{ρc} Ω − s·conj(∫_c Ω)|
  int cycles = 0;
};

// Involution identities for Ω_± over every a-cycle and period cycle of a smooth real-form point.
inline SymmetryResiduals symmetry_residuals(const ModuliPoint& p, const EvalOptions& opt = {}) {
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  if (!q.realForm) throw Error(ErrorCode::Degenerate, "involution identities need a real-form point");
  CycleSystem cs = canonical_contours(q, opt.delta, false);
  auto curves = quotient_curves(q);
  SymmetryResiduals out;
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    BranchCurve curve = analytic_curve(pick(curves, s));
    const CurveCycles& cc = cs.on(s);
    SecondKindDifferential omega = normalize_second_kind(curve, s, cc.a, opt.quad);
    std::vector<const LiftedCycle*> cycles = period_cycles(cs, s);
    for (const auto& a : cc.a) cycles.push_back(&a);
    double sgn = rho_sign(q.family, s);
    for (const LiftedCycle* c : cycles) {
      Complex v = integrate_differential(curve, *c, omega, opt.quad);
      Complex vs = integrate_differential(curve, involution_image(*c, Involution::Sigma), omega, opt.quad);
      Complex vr = integrate_differential(curve, involution_image(*c, Involution::Rho), omega, opt.quad);
      out.sigma = std::max(out.sigma, std::abs(vs + v));
      out.rho = std::max(out.rho, std::abs(vr - sgn * std::conj(v)));
      ++out.cycles;
    }
  }
  return out;
}

inline PeriodVector period_vectors(const ModuliPoint& p, const EvalOptions& opt = {}) {
  return evaluate(p, opt).periods;
}

// D = ½ Σ(branch points) − Σ ζ.
inline Complex closed_form_D(const std::vector<Complex>& branchPoints, const std::vector<Complex>& zetas) {
  Complex s = 0.0;
  for (const auto& b : branchPoints) s += 0.5 * b;
  for (const auto& z : zetas) s -= z;
  return s;
}

struct Mobius {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  // x ↦ ΔD(3x − 4ΔD)/(4x − 5ΔD)
  static Mobius from_delta(double dD) { return {3.0 * dD, -4.0 * dD * dD, 4.0, -5.0 * dD}; }
  double denominator(double x) const { return c * x + d; }
  double operator()(double x) const { return (a * x + b) / (c * x + d); }
  bool degenerate() const { return a * d - b * c == 0.0; }
};

struct InvariantSet {
  double Dplus = 0.0, Dminus = 0.0;
  double etaPlus = 0.0, etaMinus = 0.0;
  double chi = 0.0;
  std::vector<double> xis;  // (Re, Im) coordinates of each pair, in pair order
  Mobius mobius;
  double residual = 0.0;
  double conditionNumber = 0.0;
};

// derivs: columns ∂(I_+; I_−) for R (odd family only) followed by Re λ, Im λ of each pair.
inline InvariantSet invariant_set(const PeriodData& data, const std::vector<std::vector<double>>& derivs) {
  const PeriodVector& pv = data.periods;
  if (!pv.hasHat) throw Error(ErrorCode::RankDeficient, "hat periods unavailable at this point");
  int np = int(pv.plus.size()), nm = int(pv.minus.size()), N = np + nm;
  int cols = 2 + int(derivs.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, cols);
  for (int i = 0; i < np; ++i) A(i, 0) = pv.plus[i];
  for (int i = 0; i < nm; ++i) A(np + i, 1) = pv.minus[i];
  for (int j = 0; j < int(derivs.size()); ++j) {
    if (int(derivs[j].size()) != N) throw Error(ErrorCode::RankDeficient, "derivative column has wrong length");
    for (int i = 0; i < N; ++i) A(i, 2 + j) = derivs[j][i];
  }
  Eigen::VectorXd v(N);
  auto hat = pv.stacked_hat();
  for (int i = 0; i < N; ++i) v(i) = hat[i];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  InvariantSet inv;
  inv.conditionNumber = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (cols > N || !(s(s.size() - 1) > 1e-12 * s(0)))
    throw Error(ErrorCode::RankDeficient, "span matrix is rank deficient (condition " +
                                              format_double(inv.conditionNumber) + ")");
  Eigen::VectorXd x = svd.solve(v);
  inv.residual = (A * x - v).cwiseAbs().maxCoeff();
  if (inv.residual > 1e-7 * std::max(1.0, v.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::RankDeficient, "hat vector not in the span (residual " + format_double(inv.residual) + ")");
  inv.etaPlus = x(0);
  inv.etaMinus = x(1);
  int k = 2;
  if (data.point.family == Family::Odd) inv.chi = x(k++);
  for (; k < cols; ++k) inv.xis.push_back(x(k));
  inv.Dplus = data.Dplus.real();
  inv.Dminus = data.Dminus.real();
  inv.mobius = Mobius::from_delta(inv.Dplus - inv.Dminus);
  return inv;
}

enum class ObstructionStatus { Ok, Vanishes, MobiusPole, Degenerate };

inline const char* to_string(ObstructionStatus s) {
  switch (s) {
    case ObstructionStatus::Ok: return "OK";
    case ObstructionStatus::Vanishes: return "VANISHES";
    case ObstructionStatus::MobiusPole: return "MOBIUS_POLE";
    case ObstructionStatus::Degenerate: return "DEGENERATE";
  }
  return "?";
}

struct ObstructionEntry {
  int k = 0;
  double iterate = 0.0;  // T^k(η^+ − η^−)
  double value = 0.0;    // 5ΔD + 4·iterate
  bool pass = false;
  ObstructionStatus status = ObstructionStatus::Ok;
};

inline std::vector<ObstructionEntry> obstruction_check(const InvariantSet& inv, int m, double margin = 1e-9) {
  std::vector<ObstructionEntry> out;
  double dD = inv.Dplus - inv.Dminus;
  double x = inv.etaPlus - inv.etaMinus;
  bool degenerate = std::abs(dD) <= 1e-12;
  for (int k = 0; k <= m; ++k) {
    ObstructionEntry e;
    e.k = k;
    if (k > 0) {
      if (degenerate) {
        e.status = ObstructionStatus::Degenerate;
        out.push_back(e);
        continue;
      }
      double den = inv.mobius.denominator(x);
      if (std::abs(den) <= 1e-14 * (std::abs(inv.mobius.c * x) + std::abs(inv.mobius.d))) {
        e.status = ObstructionStatus::MobiusPole;
        out.push_back(e);
        break;
      }
      x = inv.mobius(x);
    }
    e.iterate = x;
    e.value = 5.0 * dD + 4.0 * x;
    e.pass = std::abs(e.value) > margin;
    e.status = e.pass ? ObstructionStatus::Ok : ObstructionStatus::Vanishes;
    out.push_back(e);
  }
  return out;
}

}  // namespace spectori
