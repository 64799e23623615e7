#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "core.hpp"
#include "polynomial.hpp"
#include "records.hpp"

namespace spectori {

struct Degeneration {
  double mu = 0.0;
  double nu = 0.0;
};

struct ModuliPoint {
  Family family = Family::Odd;
  int n = 0;
  double R = 0.0;                  // ODD only
  std::vector<Complex> lambdas;    // 2n values, pairs (λ_{2i-1}, λ_{2i})
  bool realForm = true;
  std::optional<Degeneration> degeneration;

  Complex upper(int pair) const { return lambdas[2 * pair]; }
  bool is_degenerate() const { return degeneration && degeneration->nu == 0.0; }
  bool has_extra_pair() const { return degeneration && degeneration->nu != 0.0; }

  ModuliPoint base() const {
    ModuliPoint q = *this;
    q.degeneration.reset();
    return q;
  }

  // The point of M_{n+1} carrying the pair (μ + iν, μ − iν).
  ModuliPoint expanded() const {
    ModuliPoint q = base();
    const Degeneration& d = *degeneration;
    q.n += 1;
    q.lambdas.push_back({d.mu, std::abs(d.nu)});
    q.lambdas.push_back({d.mu, -std::abs(d.nu)});
    q.realForm = realForm && std::abs(d.mu) < 2.0;
    return q;
  }

  // Genus of the spectral curve X.
  int genus() const { return family == Family::Odd ? 2 * n + 1 : 2 * n; }
};

namespace detail {
inline bool close(Complex a, Complex b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}
}  // namespace detail

inline ModuliPoint validate_moduli_point(ModuliPoint raw) {
  if (raw.n < 0) throw Error(ErrorCode::RejectRange, "n must be non-negative");
  if (raw.lambdas.size() != std::size_t(2 * raw.n))
    throw Error(ErrorCode::RejectRange, "expected 2n = " + std::to_string(2 * raw.n) + " branch values, got " +
                                            std::to_string(raw.lambdas.size()));
  for (const Complex& l : raw.lambdas)
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
      throw Error(ErrorCode::RejectRange, "non-finite branch value");
  if (raw.family == Family::Odd) {
    if (!std::isfinite(raw.R) || raw.R <= 2.0) throw Error(ErrorCode::RejectRange, "R must lie in (2, inf)");
  } else {
    raw.R = 0.0;
  }

  std::vector<Complex> fixed{-2.0, 2.0};
  if (raw.family == Family::Odd) fixed.push_back(raw.R);
  const auto& L = raw.lambdas;
  for (std::size_t i = 0; i < L.size(); ++i) {
    for (const Complex& f : fixed)
      if (detail::close(L[i], f)) throw Error(ErrorCode::RejectCollision, "branch value coincides with " + format_complex(f));
    for (std::size_t j = i + 1; j < L.size(); ++j)
      if (detail::close(L[i], L[j]))
        throw Error(ErrorCode::RejectCollision, "branch values " + std::to_string(i + 1) + " and " +
                                                    std::to_string(j + 1) + " coincide");
  }

  if (raw.realForm) {
    for (int i = 0; i < raw.n; ++i) {
      Complex a = L[2 * i], b = L[2 * i + 1];
      if (!detail::close(b, std::conj(a), 1e-13) || a.imag() <= 0.0)
        throw Error(ErrorCode::RejectConjugacy, "pair " + std::to_string(i + 1) +
                                                    " must be (upper-half value, its conjugate)");
      if (!(std::abs(a.real()) < 2.0))
        throw Error(ErrorCode::RejectRange, "pair " + std::to_string(i + 1) + " needs Re in (-2, 2)");
      raw.lambdas[2 * i + 1] = std::conj(a);
    }
  }

  if (raw.degeneration) {
    Degeneration& d = *raw.degeneration;
    if (!std::isfinite(d.mu) || !std::isfinite(d.nu)) throw Error(ErrorCode::RejectRange, "non-finite (mu, nu)");
    d.nu = std::abs(d.nu);
    std::vector<Complex> all = fixed;
    all.insert(all.end(), L.begin(), L.end());
    for (const Complex& f : all)
      if (detail::close(Complex(d.mu, d.nu), f) || detail::close(Complex(d.mu, -d.nu), f))
        throw Error(ErrorCode::RejectCollision, "degeneration pair collides with " + format_complex(f));
  }
  return raw;
}

// Realform point from the upper-half-plane members of each pair.
inline ModuliPoint make_point(Family family, double R, const std::vector<Complex>& uppers) {
  ModuliPoint p;
  p.family = family;
  p.n = int(uppers.size());
  p.R = R;
  for (const Complex& u : uppers) {
    p.lambdas.push_back(u);
    p.lambdas.push_back(std::conj(u));
  }
  return validate_moduli_point(p);
}

inline ModuliPoint make_odd(double R, const std::vector<Complex>& uppers = {}) {
  return make_point(Family::Odd, R, uppers);
}
inline ModuliPoint make_even(const std::vector<Complex>& uppers = {}) { return make_point(Family::Even, 0.0, uppers); }

inline ModuliPoint with_degeneration(ModuliPoint p, double mu, double nu) {
  p.degeneration = Degeneration{mu, nu};
  return validate_moduli_point(p);
}

struct QuotientCurve {
  Family family = Family::Odd;
  CurveSign sign = CurveSign::Plus;
  std::vector<Complex> branchPoints;
  int degree = 0;
  std::optional<Complex> degenerateRoot;

  // Branch points of the normalization (the double root removed).
  std::vector<Complex> smooth_branch_points() const {
    if (!degenerateRoot) return branchPoints;
    std::vector<Complex> out;
    int skipped = 0;
    for (const Complex& b : branchPoints) {
      if (skipped < 2 && b == *degenerateRoot) {
        ++skipped;
        continue;
      }
      out.push_back(b);
    }
    return out;
  }

  Complex P(Complex z) const { return product_eval(branchPoints, z); }
};

inline std::pair<QuotientCurve, QuotientCurve> quotient_curves(const ModuliPoint& p) {
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  QuotientCurve plus{q.family, CurveSign::Plus, {}, 0, std::nullopt};
  QuotientCurve minus{q.family, CurveSign::Minus, {}, 0, std::nullopt};
  if (q.family == Family::Odd) {
    plus.branchPoints = {q.R};
    minus.branchPoints = {-2.0, 2.0, q.R};
  } else {
    plus.branchPoints = {-2.0};
    minus.branchPoints = {2.0};
  }
  for (const Complex& l : q.lambdas) {
    plus.branchPoints.push_back(l);
    minus.branchPoints.push_back(l);
  }
  if (p.is_degenerate()) {
    Complex mu = p.degeneration->mu;
    for (QuotientCurve* c : {&plus, &minus}) {
      c->branchPoints.push_back(mu);
      c->branchPoints.push_back(mu);
      c->degenerateRoot = mu;
    }
  }
  plus.degree = int(plus.branchPoints.size());
  minus.degree = int(minus.branchPoints.size());
  return {plus, minus};
}

inline const QuotientCurve& pick(const std::pair<QuotientCurve, QuotientCurve>& cs, CurveSign s) {
  return s == CurveSign::Plus ? cs.first : cs.second;
}

struct SpectralModel {
  std::vector<Complex> xBranchPoints;
  std::vector<Complex> alphas;  // one per z-branch value, |α| > 1
  int genus = 0;
  bool hasZeroBranch = true;

  Complex P(Complex x) const { return product_eval(xBranchPoints, x); }
};

// Root of α² − λα + 1 = 0 with |α| ≥ 1.
inline Complex outer_root(Complex lambda) {
  Complex s = std::sqrt(lambda * lambda - 4.0);
  Complex a = 0.5 * (lambda + s), b = 0.5 * (lambda - s);
  return std::abs(a) >= std::abs(b) ? a : b;
}

inline SpectralModel spectral_model(const ModuliPoint& p, double unitTol = 1e-9) {
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  SpectralModel m;
  m.xBranchPoints.push_back(0.0);
  std::vector<Complex> values;
  if (q.family == Family::Odd) values.push_back(q.R);
  values.insert(values.end(), q.lambdas.begin(), q.lambdas.end());
  for (const Complex& v : values) {
    Complex a = outer_root(v);
    if (std::abs(std::abs(a) - 1.0) <= unitTol)
      throw Error(ErrorCode::UnitModulus, "|alpha| = 1 for branch value " + format_complex(v));
    m.alphas.push_back(a);
    m.xBranchPoints.push_back(a);
    m.xBranchPoints.push_back(1.0 / a);
  }
  m.genus = q.genus();
  m.hasZeroBranch = true;
  return m;
}

struct QuotientImage {
  Complex z;
  Complex wPlus;
  Complex wMinus;
  double residualPlus = 0.0;
  double residualMinus = 0.0;
};

inline QuotientImage quotient_map_check(const ModuliPoint& p, Complex x, Complex y, double tol = 1e-8) {
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  SpectralModel m = spectral_model(q, 0.0);
  Complex px = m.P(x);
  if (std::abs(y * y - px) > tol * std::max(1.0, std::abs(px)))
    throw Error(ErrorCode::OffCurve, "sample does not satisfy the equation of X");
  QuotientImage img;
  img.z = x + 1.0 / x;
  Complex xn1 = std::pow(x, q.n + 1);
  if (q.family == Family::Odd) {
    img.wPlus = y / xn1;
    img.wMinus = (x + 1.0) * (x - 1.0) * y / (xn1 * x);
  } else {
    img.wPlus = (x + 1.0) * y / xn1;
    img.wMinus = (x - 1.0) * y / xn1;
  }
  auto [cp, cm] = quotient_curves(q);
  Complex pp = cp.P(img.z), pm = cm.P(img.z);
  img.residualPlus = std::abs(img.wPlus * img.wPlus - pp) / std::max(1.0, std::abs(pp));
  img.residualMinus = std::abs(img.wMinus * img.wMinus - pm) / std::max(1.0, std::abs(pm));
  return img;
}

inline Record to_record(const ModuliPoint& p, const std::string& kind = "point") {
  Record r(kind);
  r.add("family", to_string(p.family)).add("n", p.n);
  if (p.family == Family::Odd) r.add("R", p.R);
  for (const Complex& l : p.lambdas) r.add("lambda", l);
  r.add("real", p.realForm);
  if (p.degeneration) r.add("mu", p.degeneration->mu).add("nu", p.degeneration->nu);
  return r;
}

inline Family parse_family(const std::string& s) {
  if (s == "odd" || s == "ODD") return Family::Odd;
  if (s == "even" || s == "EVEN") return Family::Even;
  throw Error(ErrorCode::Parse, "unknown family '" + s + "'");
}

inline ModuliPoint moduli_point_from_record(const ParsedRecord& rec) {
  ModuliPoint p;
  p.family = parse_family(rec.require("family"));
  p.n = int(parse_long(rec.require("n"), "n"));
  if (p.family == Family::Odd) p.R = parse_double(rec.require("R"), "R");
  for (const std::string& s : rec.get_all("lambda")) p.lambdas.push_back(parse_complex(s, "lambda"));
  if (auto real = rec.get("real")) p.realForm = (*real == "1");
  auto mu = rec.get("mu"), nu = rec.get("nu");
  if (mu || nu) {
    if (!mu || !nu) throw Error(ErrorCode::Parse, "mu and nu must be given together");
    p.degeneration = Degeneration{parse_double(*mu, "mu"), parse_double(*nu, "nu")};
  }
  return validate_moduli_point(p);
}

inline ModuliPoint moduli_point_from_record(const std::string& line) {
  return moduli_point_from_record(parse_record(line));
}

}  // namespace spectori
