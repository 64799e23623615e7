#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "analytic.hpp"
#include "geometry.hpp"

namespace spectori {

enum class CycleKind { A, B, C, GammaCircle };

struct CycleLabel {
  CycleKind kind = CycleKind::A;
  int index = 0;  // a_i/b_i index; ±1 for c_{±1}

  std::string str() const {
    switch (kind) {
      case CycleKind::A: return "a" + std::to_string(index);
      case CycleKind::B: return "b" + std::to_string(index);
      case CycleKind::C: return index > 0 ? "c+1" : "c-1";
      case CycleKind::GammaCircle: return "gamma";
    }
    return "?";
  }
};

struct LiftedCycle {
  PlanarPath path;
  Complex startFiber;
  CycleLabel label;
  CurveSign curveSign = CurveSign::Plus;
  Family family = Family::Odd;
  double anchor = 0.0;  // real point where the sheet convention fixes the lift
};

struct CurveCycles {
  CurveSign sign = CurveSign::Plus;
  std::vector<LiftedCycle> a, b;
  Eigen::MatrixXi intersection;  // order a_*, b_*
};

struct CycleSystem {
  Family family = Family::Odd;
  double delta = 0.0;
  CurveCycles plus, minus;
  std::vector<LiftedCycle> openCurves;  // c_{+1}, c_{-1}

  const CurveCycles& on(CurveSign s) const { return s == CurveSign::Plus ? plus : minus; }
  const LiftedCycle& c(int index) const { return openCurves[index > 0 ? 0 : 1]; }
};

// Sheet conventions, written as the unit u with w/u > 0 at the reference point.
inline Complex a_rule_unit(Family f, CurveSign s) {
  if (f == Family::Odd) return s == CurveSign::Plus ? -kI : Complex(1.0);
  return s == CurveSign::Plus ? Complex(1.0) : kI;
}
inline Complex c_rule_unit(Family f, CurveSign s) {
  if (f == Family::Odd) return kI;
  return s == CurveSign::Plus ? Complex(1.0) : kI;
}
// The sign s in ρ(z, w) = (z̄, s·w̄).
inline double rho_sign(Family f, CurveSign s) {
  if (f == Family::Odd) return s == CurveSign::Plus ? -1.0 : 1.0;
  return s == CurveSign::Plus ? 1.0 : -1.0;
}

inline Complex fiber_by_rule(const BranchCurve& c, Complex z, Complex unit) {
  Complex w = std::sqrt(c.P(z));
  return (w / unit).real() >= 0.0 ? w : -w;
}

// w ≈ z^{deg/2} for large real z.
inline Complex principal_fiber(const BranchCurve& c, Complex z) {
  Complex ref = std::pow(z, 0.5 * double(c.roots.size()));
  return nearest_sqrt(c.P(z), ref);
}

struct PairGeom {
  int index;  // pair number in the point's λ list
  double x, y;
};

// Placement data shared by all contours of a point.
struct ContourLayout {
  Family family = Family::Odd;
  double R = 0.0;
  std::vector<PairGeom> pairs;
  double minSeparation = 0.0;
  double delta = 0.0;
  double margin = 0.5;
  double gap = 0.25;
  double ybase = 0.0;

  double edge() const { return family == Family::Odd ? R : 2.0; }
  int count_right(double x) const {
    int r = 0;
    for (const auto& p : pairs) r += p.x > x;
    return r;
  }
  int count_left(double x) const {
    int r = 0;
    for (const auto& p : pairs) r += p.x < x;
    return r;
  }
  double height(int rank) const { return ybase + gap * rank; }
  double right_edge(int rank) const { return edge() + margin + gap * rank; }
  double left_edge(int rank) const { return -2.0 - margin - gap * rank; }
  int outer() const { return int(pairs.size()); }
};

inline ContourLayout contour_layout(const ModuliPoint& p, double delta, std::optional<double> extraX = std::nullopt) {
  if (!p.realForm) throw Error(ErrorCode::Degenerate, "canonical contours need a real-form point");
  ContourLayout L;
  L.family = p.family;
  L.R = p.R;
  std::vector<double> reals{-2.0, 2.0};
  if (p.family == Family::Odd) reals.push_back(p.R);
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reals.size(); ++i)
    for (std::size_t j = i + 1; j < reals.size(); ++j) sep = std::min(sep, std::abs(reals[i] - reals[j]));
  double ymax = 0.0;
  for (int i = 0; i < p.n; ++i) {
    Complex l = p.upper(i);
    L.pairs.push_back({i, l.real(), l.imag()});
    ymax = std::max(ymax, l.imag());
  }
  std::vector<double> xs;
  for (const auto& g : L.pairs) xs.push_back(g.x);
  if (extraX) xs.push_back(*extraX);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (double r : reals) sep = std::min(sep, std::abs(xs[i] - r));
    for (std::size_t j = i + 1; j < xs.size(); ++j) sep = std::min(sep, std::abs(xs[i] - xs[j]));
  }
  for (const auto& g : L.pairs) sep = std::min(sep, 2.0 * g.y);
  L.minSeparation = sep;
  L.delta = delta > 0.0 ? delta : 0.1 * sep;
  double edge = std::numeric_limits<double>::infinity();
  for (double x : xs) edge = std::min(edge, 2.0 - std::abs(x));
  if (edge < 1e-9) throw Error(ErrorCode::Degenerate, "real-axis crossing at distance " + format_double(edge) + " from ±2");
  if (!(L.delta < 0.5 * sep)) {
    if (edge <= sep)
      throw Error(ErrorCode::Degenerate, "crossing within " + format_double(edge) + " of ±2 leaves no room for clearance " +
                                             format_double(L.delta));
    throw Error(ErrorCode::Clearance, "clearance " + format_double(L.delta) + " not below half the separation " +
                                          format_double(sep));
  }
  for (double x : xs)
    if (!(std::abs(x) + L.delta < 2.0))
      throw Error(ErrorCode::Degenerate, "real-axis crossings leave (-2, 2)");
  L.ybase = ymax + L.margin;
  if (extraX) L.pairs.push_back({-1, *extraX, 0.0});
  return L;
}

namespace paths {

inline PlanarPath vertical_stadium(double x, double y, double d, double clearance) {
  return PathBuilder({x + d, 0.0})
      .line_to({x + d, y})
      .arc({x, y}, kPi)
      .line_to({x - d, -y})
      .arc({x, -y}, kPi)
      .line_to({x + d, 0.0})
      .build(clearance);
}

inline PlanarPath horizontal_stadium(double e1, double e2, double d, double clearance) {
  return PathBuilder({e2 + d, 0.0})
      .arc({e2, 0.0}, 0.5 * kPi)
      .line_to({e1, d})
      .arc({e1, 0.0}, kPi)
      .line_to({e2, -d})
      .arc({e2, 0.0}, 0.5 * kPi)
      .build(clearance);
}

// Dual cycle through the cut at x. Right-going polygons close beyond the
// right edge, left-going ones beyond −2. eps = 0 gives the open path from x.
inline PlanarPath b_polygon(double x, double eps, double Y, double Xfar, bool rightGoing, double clearance) {
  Complex B{x + eps, 0.0}, A{x - eps, 0.0};
  PathBuilder pb(B);
  if (rightGoing) {
    pb.line_to({x + eps, -Y}).line_to({Xfar, -Y}).line_to({Xfar, Y}).line_to({x - eps, Y}).line_to(A).line_to(B);
  } else {
    pb.line_to(A).line_to({x - eps, -Y}).line_to({Xfar, -Y}).line_to({Xfar, Y}).line_to({x + eps, Y}).line_to(B);
  }
  return pb.build(clearance);
}

// Counter-clockwise rectangle starting and ending at x0 on the real axis.
inline PlanarPath rectangle_from(double x0, double Xfar, double Y, double clearance) {
  PathBuilder pb({x0, 0.0});
  if (Xfar > x0)
    pb.line_to({x0, -Y}).line_to({Xfar, -Y}).line_to({Xfar, Y}).line_to({x0, Y}).line_to({x0, 0.0});
  else
    pb.line_to({x0, Y}).line_to({Xfar, Y}).line_to({Xfar, -Y}).line_to({x0, -Y}).line_to({x0, 0.0});
  return pb.build(clearance);
}

}  // namespace paths

inline bool b_right_going(Family f, CurveSign s) {
  return (f == Family::Odd) == (s == CurveSign::Plus);
}

struct WindingSample {
  std::vector<Complex> pts;
};

inline std::vector<Complex> sample_path(const PlanarPath& path, int perSegment = 256) {
  std::vector<Complex> pts;
  for (const auto& s : path.segments)
    for (int k = 0; k < perSegment; ++k) pts.push_back(s.point(double(k) / perSegment));
  pts.push_back(path.end());
  return pts;
}

// Argument-principle winding number of a closed planar path about `point`.
inline int winding_number(const PlanarPath& path, Complex point) {
  auto pts = sample_path(path);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) total += std::arg((pts[k + 1] - point) / (pts[k] - point));
  double w = total / (2.0 * kPi);
  long r = std::lround(w);
  if (std::abs(w - double(r)) > 1e-6) throw Error(ErrorCode::NearBranch, "winding number not integral");
  return int(r);
}

struct Polyline {
  std::vector<Complex> z;
  std::vector<Complex> w;
};

inline Polyline lifted_polyline(const BranchCurve& curve, const LiftedCycle& c) {
  TrackOptions opt;
  opt.maxParamStep = 1.0 / 64.0;
  opt.logStep = 0.1;
  FiberTrack t = continue_fiber(curve, c.path, c.startFiber, opt);
  Polyline pl;
  for (const auto& n : t.nodes) {
    if (!pl.z.empty() && std::abs(pl.z.back() - n.z) == 0.0) continue;
    pl.z.push_back(n.z);
    pl.w.push_back(n.w);
  }
  return pl;
}

// Signed count of crossings on the same sheet: sign Im(conj(t_a)·t_b).
inline int intersection_number(const BranchCurve& curve, const LiftedCycle& a, const LiftedCycle& b) {
  Polyline pa = lifted_polyline(curve, a), pb = lifted_polyline(curve, b);
  int total = 0;
  for (std::size_t i = 0; i + 1 < pa.z.size(); ++i) {
    Complex p = pa.z[i], r = pa.z[i + 1] - p;
    for (std::size_t j = 0; j + 1 < pb.z.size(); ++j) {
      Complex q = pb.z[j], s = pb.z[j + 1] - q;
      double den = (std::conj(r) * s).imag();
      if (den == 0.0) continue;
      double t = (std::conj(q - p) * s).imag() / den;
      double u = (std::conj(q - p) * r).imag() / den;
      if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
      Complex z = p + r * t;
      Complex wa = nearest_sqrt(curve.P(z), pa.w[i] + (pa.w[i + 1] - pa.w[i]) * t);
      Complex wb = nearest_sqrt(curve.P(z), pb.w[j] + (pb.w[j + 1] - pb.w[j]) * u);
      if (std::abs(wa - wb) < std::abs(wa + wb)) total += den > 0 ? 1 : -1;
    }
  }
  return total;
}

inline Eigen::MatrixXi intersection_matrix(const BranchCurve& curve, const CurveCycles& cc) {
  std::vector<const LiftedCycle*> all;
  for (const auto& c : cc.a) all.push_back(&c);
  for (const auto& c : cc.b) all.push_back(&c);
  int m = int(all.size());
  Eigen::MatrixXi M = Eigen::MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      M(i, j) = intersection_number(curve, *all[i], *all[j]);
      M(j, i) = -M(i, j);
    }
  return M;
}

inline Complex continue_to(const BranchCurve& curve, const PlanarPath& path, Complex w0) {
  return continue_fiber(curve, path, w0).end_fiber();
}

namespace detail {

inline LiftedCycle pair_a_cycle(const BranchCurve& curve, const ContourLayout& L, const PairGeom& g, Family f,
                                CurveSign s) {
  LiftedCycle a;
  a.path = paths::vertical_stadium(g.x, g.y, L.delta, 0.5 * L.delta);
  a.startFiber = fiber_by_rule(curve, a.path.start(), a_rule_unit(f, s));
  a.anchor = a.path.start().real();
  a.label = {CycleKind::A, g.index + 1};
  a.curveSign = s;
  a.family = f;
  return a;
}

inline LiftedCycle pair_b_cycle(const BranchCurve& curve, const ContourLayout& L, const PairGeom& g,
                                const LiftedCycle& a, Family f, CurveSign s) {
  bool right = b_right_going(f, s);
  double eps = 0.5 * L.delta;
  int rank = right ? L.count_right(g.x) : L.count_left(g.x);
  double Y = L.height(rank);
  double Xfar = right ? L.right_edge(rank) : L.left_edge(rank);
  LiftedCycle b;
  b.path = paths::b_polygon(g.x, eps, Y, Xfar, right, 0.5 * eps);
  Complex wa = continue_to(curve, PathBuilder(a.path.start()).line_to(b.path.start()).build(), a.startFiber);
  b.startFiber = right ? -wa : wa;
  b.anchor = a.anchor;
  b.label = {CycleKind::B, g.index + 1};
  b.curveSign = s;
  b.family = f;
  return b;
}

}  // namespace detail

inline CycleSystem canonical_contours(const ModuliPoint& point, double delta = 0.0, bool withIntersections = true) {
  ModuliPoint p = point.has_extra_pair() ? point.expanded() : point.base();
  ContourLayout L = contour_layout(p, delta);
  auto curves = quotient_curves(p);
  CycleSystem cs;
  cs.family = p.family;
  cs.delta = L.delta;
  const Family f = p.family;

  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    CurveCycles& cc = s == CurveSign::Plus ? cs.plus : cs.minus;
    cc.sign = s;
    BranchCurve curve = analytic_curve(pick(curves, s));
    if (f == Family::Odd && s == CurveSign::Minus) {
      LiftedCycle a0;
      a0.path = paths::horizontal_stadium(2.0, p.R, L.delta, 0.5 * L.delta);
      a0.startFiber = fiber_by_rule(curve, a0.path.start(), a_rule_unit(f, s));
      a0.anchor = a0.path.start().real();
      a0.label = {CycleKind::A, 0};
      a0.curveSign = s;
      a0.family = f;
      double X0 = 0.5 * (2.0 + p.R);
      double Y0 = L.height(L.outer());
      double Xl = L.left_edge(L.outer());
      LiftedCycle b0;
      b0.path = PathBuilder({X0, Y0})
                    .line_to({X0, -Y0})
                    .line_to({Xl, -Y0})
                    .line_to({Xl, Y0})
                    .line_to({X0, Y0})
                    .build(0.5 * L.delta);
      PlanarPath helper = PathBuilder(a0.path.start())
                              .arc({p.R, 0.0}, 0.5 * kPi)
                              .line_to({X0, L.delta})
                              .line_to({X0, Y0})
                              .build();
      b0.startFiber = continue_to(curve, helper, a0.startFiber);
      b0.anchor = a0.anchor;
      b0.label = {CycleKind::B, 0};
      b0.curveSign = s;
      b0.family = f;
      cc.a.push_back(a0);
      cc.b.push_back(b0);
    }
    for (const auto& g : L.pairs) {
      LiftedCycle a = detail::pair_a_cycle(curve, L, g, f, s);
      cc.b.push_back(detail::pair_b_cycle(curve, L, g, a, f, s));
      cc.a.push_back(std::move(a));
    }
    if (withIntersections) cc.intersection = intersection_matrix(curve, cc);
  }

  double Yc = L.height(L.outer() + 1);
  auto make_c = [&](int index, CurveSign s, PlanarPath path) {
    BranchCurve curve = analytic_curve(pick(curves, s));
    LiftedCycle c;
    c.path = std::move(path);
    c.startFiber = fiber_by_rule(curve, c.path.start(), c_rule_unit(f, s));
    c.anchor = c.path.start().real();
    c.label = {CycleKind::C, index};
    c.curveSign = s;
    c.family = f;
    return c;
  };
  if (f == Family::Odd) {
    cs.openCurves.push_back(
        make_c(1, CurveSign::Plus, paths::rectangle_from(2.0, p.R + L.margin, L.margin, 0.5 * L.delta)));
    cs.openCurves.push_back(make_c(
        -1, CurveSign::Plus, paths::rectangle_from(-2.0, L.right_edge(L.outer() + 1), Yc, 0.5 * L.delta)));
  } else {
    cs.openCurves.push_back(
        make_c(1, CurveSign::Plus, paths::rectangle_from(2.0, L.left_edge(L.outer() + 1), Yc, 0.5 * L.delta)));
    cs.openCurves.push_back(make_c(
        -1, CurveSign::Minus, paths::rectangle_from(-2.0, L.right_edge(L.outer() + 1), Yc, 0.5 * L.delta)));
  }
  return cs;
}

// Open dual path of the extra pair at a degenerate point (p, μ, 0), lifted to
// the normalization C_±(p): it starts and ends over z = μ on opposite sheets.
// The start sheet is the ν → 0 limit of b_{n+1}(p, μ, ν): whichever way the
// closed cycle runs, on the long part of the path w(p, μ, ν)/(z − μ) tends to
// minus the a-convention sheet of w_p at μ.
inline LiftedCycle degenerate_b_cycle(const ModuliPoint& p0, CurveSign s, double delta = 0.0) {
  if (!p0.is_degenerate()) throw Error(ErrorCode::Degenerate, "point has no (mu, 0) degeneration");
  ModuliPoint p = p0.base();
  double mu = p0.degeneration->mu;
  ContourLayout L = contour_layout(p, delta, mu);
  BranchCurve curve = analytic_curve(pick(quotient_curves(p), s));
  bool right = b_right_going(p.family, s);
  int rank = right ? L.count_right(mu) : L.count_left(mu);
  double Y = L.height(rank);
  double Xfar = right ? L.right_edge(rank) : L.left_edge(rank);
  PathBuilder pb({mu, 0.0});
  pb.line_to({mu, -Y}).line_to({Xfar, -Y}).line_to({Xfar, Y}).line_to({mu, Y}).line_to({mu, 0.0});
  LiftedCycle b;
  b.path = pb.build(0.5 * L.delta);
  b.startFiber = -fiber_by_rule(curve, mu, a_rule_unit(p.family, s));
  b.anchor = mu;
  b.label = {CycleKind::B, p.n + 1};
  b.curveSign = s;
  b.family = p.family;
  return b;
}

enum class Orientation { Clockwise, CounterClockwise };

// |z| = μ traversed from (μ, −w0) to (μ, w0), w0 the principal fiber at μ.
inline LiftedCycle large_circle(const ModuliPoint& point, double mu, CurveSign s,
                                Orientation o = Orientation::Clockwise) {
  ModuliPoint p = point.base();
  auto curves = quotient_curves(p);
  double rmax = 0.0;
  for (const auto* c : {&curves.first, &curves.second})
    for (const auto& b : c->branchPoints) rmax = std::max(rmax, std::abs(b));
  if (!(mu > rmax)) throw Error(ErrorCode::TooSmall, "circle radius does not enclose the branch points");
  BranchCurve curve = analytic_curve(pick(curves, s));
  LiftedCycle c;
  double sweep = o == Orientation::Clockwise ? -2.0 * kPi : 2.0 * kPi;
  c.path.segments.push_back(Segment::arc(0.0, mu, 0.0, sweep));
  c.path.closed = true;
  c.path.clearance = mu - rmax;
  c.startFiber = -principal_fiber(curve, mu);
  c.label = {CycleKind::GammaCircle, p.n + 1};
  c.curveSign = s;
  c.family = p.family;
  return c;
}

// Counter-clockwise circle about a regular point z0 on the sheet through w0.
inline LiftedCycle small_loop(Complex z0, double radius, Complex w0Sheet, const BranchCurve& curve, CurveSign s,
                              Family f) {
  LiftedCycle c;
  c.path.segments.push_back(Segment::arc(z0, radius, 0.0, 2.0 * kPi));
  c.path.closed = true;
  c.startFiber = nearest_sqrt(curve.P(z0 + radius), w0Sheet);
  c.label = {CycleKind::A, -1};
  c.curveSign = s;
  c.family = f;
  return c;
}

enum class Involution { Sigma, Rho };

inline LiftedCycle involution_image(const LiftedCycle& c, Involution which) {
  LiftedCycle out = c;
  if (which == Involution::Sigma) {
    out.startFiber = -c.startFiber;
  } else {
    out.path = c.path.conjugated();
    out.startFiber = rho_sign(c.family, c.curveSign) * std::conj(c.startFiber);
  }
  return out;
}

}  // namespace spectori
