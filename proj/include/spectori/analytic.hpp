#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"
#include "polynomial.hpp"

namespace spectori {

struct Segment {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  Complex a, b;  // line endpoints
  Complex center;
  double radius = 0.0, theta0 = 0.0, theta1 = 0.0;
  bool branchStart = false, branchEnd = false;

  static Segment line(Complex from, Complex to) {
    Segment s;
    s.kind = Kind::Line;
    s.a = from;
    s.b = to;
    return s;
  }
  static Segment arc(Complex c, double r, double t0, double t1) {
    Segment s;
    s.kind = Kind::Arc;
    s.center = c;
    s.radius = r;
    s.theta0 = t0;
    s.theta1 = t1;
    return s;
  }

  Complex point(double s) const {
    if (kind == Kind::Line) return a + (b - a) * s;
    return center + radius * std::polar(1.0, theta0 + (theta1 - theta0) * s);
  }
  Complex tangent(double s) const {
    if (kind == Kind::Line) return b - a;
    return kI * radius * (theta1 - theta0) * std::polar(1.0, theta0 + (theta1 - theta0) * s);
  }
  Complex start() const { return point(0.0); }
  Complex end() const { return point(1.0); }
  double length() const {
    return kind == Kind::Line ? std::abs(b - a) : radius * std::abs(theta1 - theta0);
  }

  Segment conjugated() const {
    Segment s = *this;
    s.a = std::conj(a);
    s.b = std::conj(b);
    s.center = std::conj(center);
    s.theta0 = -theta0;
    s.theta1 = -theta1;
    return s;
  }

  double distance_to(Complex p) const {
    if (kind == Kind::Line) {
      Complex d = b - a;
      double L2 = std::norm(d);
      double t = L2 > 0 ? std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0) : 0.0;
      return std::abs(p - (a + d * t));
    }
    double ang = std::arg(p - center);
    double lo = std::min(theta0, theta1), hi = std::max(theta0, theta1);
    double best = std::min(std::abs(p - start()), std::abs(p - end()));
    for (int k = -3; k <= 3; ++k) {
      double t = ang + 2.0 * kPi * k;
      if (t >= lo && t <= hi) best = std::min(best, std::abs(std::abs(p - center) - radius));
    }
    return best;
  }
};

struct PlanarPath {
  std::vector<Segment> segments;
  bool closed = false;
  double clearance = 0.0;  // guaranteed distance from branch points, 0 if unknown

  Complex start() const { return segments.front().start(); }
  Complex end() const { return segments.back().end(); }
  double length() const {
    double L = 0.0;
    for (const auto& s : segments) L += s.length();
    return L;
  }
  PlanarPath conjugated() const {
    PlanarPath p = *this;
    for (auto& s : p.segments) s = s.conjugated();
    return p;
  }
};

class PathBuilder {
 public:
  explicit PathBuilder(Complex start) : cur_(start), start_(start) {}

  PathBuilder& line_to(Complex z) {
    if (std::abs(z - cur_) > 0.0) path_.segments.push_back(Segment::line(cur_, z));
    cur_ = z;
    return *this;
  }
  // Arc about `center` from the current point through the signed angle `sweep`.
  PathBuilder& arc(Complex center, double sweep) {
    double r = std::abs(cur_ - center);
    double t0 = std::arg(cur_ - center);
    Segment s = Segment::arc(center, r, t0, t0 + sweep);
    path_.segments.push_back(s);
    cur_ = s.end();
    return *this;
  }
  PlanarPath build(double clearance = 0.0) {
    PlanarPath p = path_;
    double scale = 1.0 + std::abs(start_) + std::abs(cur_);
    p.closed = std::abs(cur_ - start_) <= 1e-12 * scale;
    if (p.closed && !p.segments.empty()) {
      Segment& last = p.segments.back();
      if (last.kind == Segment::Kind::Line) last.b = start_;
    }
    p.clearance = clearance;
    return p;
  }

 private:
  PlanarPath path_;
  Complex cur_, start_;
};

struct BranchCurve {
  std::vector<Complex> roots;

  Complex P(Complex z) const { return product_eval(roots, z); }
  double scale() const {
    double s = 1.0;
    for (const auto& r : roots) s = std::max(s, std::abs(r));
    return s;
  }
};

inline BranchCurve analytic_curve(const QuotientCurve& c) { return BranchCurve{c.smooth_branch_points()}; }

inline Complex nearest_sqrt(Complex value, Complex ref) {
  Complex s = std::sqrt(value);
  return std::abs(s - ref) <= std::abs(s + ref) ? s : -s;
}

namespace detail {

// Parametrization of one segment. For branch endpoints the segment is
// reparametrized quadratically and the tracked quantity is g with w = v·g
// (or (1−v)·g), which stays analytic and nonzero at the endpoint.
struct SegmentMap {
  const Segment* seg = nullptr;
  const BranchCurve* curve = nullptr;
  int mode = 0;  // 0 plain, 1 branch start, 2 branch end
  Complex e, other;
  int eIndex = -1;

  SegmentMap(const Segment& s, const BranchCurve& c) : seg(&s), curve(&c) {
    if (s.branchStart || s.branchEnd) {
      if (s.kind != Segment::Kind::Line || (s.branchStart && s.branchEnd))
        throw Error(ErrorCode::NearBranch, "branch endpoints need a line segment with one flagged end");
      mode = s.branchStart ? 1 : 2;
      e = s.branchStart ? s.a : s.b;
      other = s.branchStart ? s.b : s.a;
      double best = 1e300;
      for (std::size_t k = 0; k < c.roots.size(); ++k) {
        double d = std::abs(c.roots[k] - e);
        if (d < best) best = d, eIndex = int(k);
      }
      if (best > 1e-12 * (1.0 + std::abs(e)))
        throw Error(ErrorCode::NearBranch, "flagged branch endpoint is not a branch point");
      e = c.roots[eIndex];
    }
  }

  Complex z(double v) const {
    if (mode == 0) return seg->point(v);
    double t = mode == 1 ? v : 1.0 - v;
    return e + (other - e) * (t * t);
  }
  Complex dz(double v) const {
    if (mode == 0) return seg->tangent(v);
    return mode == 1 ? 2.0 * (other - e) * v : -2.0 * (other - e) * (1.0 - v);
  }
  // Quantity whose continuous square root is tracked.
  Complex h(double v) const {
    Complex zz = z(v);
    if (mode == 0) return curve->P(zz);
    Complex acc = other - e;
    for (std::size_t k = 0; k < curve->roots.size(); ++k)
      if (int(k) != eIndex) acc *= (zz - curve->roots[k]);
    return acc;
  }
  Complex w(double v, Complex g) const {
    if (mode == 0) return g;
    return (mode == 1 ? v : 1.0 - v) * g;
  }
  // dz/w expressed through g.
  Complex measure(double v, Complex g) const {
    if (mode == 0) return dz(v) / g;
    return (mode == 1 ? 2.0 : -2.0) * (other - e) / g;
  }
  // Bound on |d log h / dv|.
  double log_speed(double v) const {
    Complex zz = z(v);
    double s = 0.0;
    for (std::size_t k = 0; k < curve->roots.size(); ++k) {
      if (int(k) == eIndex) continue;
      s += 1.0 / std::max(std::abs(zz - curve->roots[k]), 1e-300);
    }
    return s * std::abs(dz(v));
  }
};

}  // namespace detail

struct FiberNode {
  int segment = 0;
  double v = 0.0;
  Complex z;
  Complex w;
  Complex g;  // tracked value (equals w away from branch endpoints)
};

struct FiberTrack {
  std::vector<FiberNode> nodes;
  double maxStep = 0.0;

  Complex start_fiber() const { return nodes.front().w; }
  Complex end_fiber() const { return nodes.back().w; }
};

struct TrackOptions {
  double logStep = 0.3;    // bound on |Δ log P| between nodes
  double maxParamStep = 1.0 / 16.0;
  double seedTol = 1e-9;
};

namespace detail {

inline std::vector<std::pair<double, Complex>> track_segment(const SegmentMap& map, double vFrom, double vTo,
                                                             Complex gFrom, const TrackOptions& opt) {
  std::vector<std::pair<double, Complex>> out{{vFrom, gFrom}};
  double dir = vTo > vFrom ? 1.0 : -1.0;
  double v = vFrom;
  Complex g = gFrom;
  int guard = 0;
  while (dir * (vTo - v) > 0.0) {
    double speed = map.log_speed(v);
    double dv = std::min(opt.maxParamStep, speed > 0 ? opt.logStep / speed : opt.maxParamStep);
    dv = std::max(dv, 1e-9);
    double vn = v + dir * dv;
    if (dir * (vn - vTo) > 0.0) vn = vTo;
    Complex gn = nearest_sqrt(map.h(vn), g);
    v = vn;
    g = gn;
    out.emplace_back(v, g);
    if (++guard > 10000000) throw Error(ErrorCode::NoConvergence, "fiber continuation did not terminate");
  }
  return out;
}

}  // namespace detail

inline void check_clearance(const BranchCurve& curve, const PlanarPath& path) {
  double minAllowed = std::max(0.999 * path.clearance, 1e-13 * curve.scale());
  for (const Segment& s : path.segments) {
    for (const Complex& r : curve.roots) {
      bool endpoint = (s.branchStart && std::abs(r - s.a) <= 1e-12 * (1 + std::abs(r))) ||
                      (s.branchEnd && std::abs(r - s.b) <= 1e-12 * (1 + std::abs(r)));
      if (endpoint) continue;
      double d = s.distance_to(r);
      if (d < minAllowed)
        throw Error(ErrorCode::NearBranch, "path passes within " + format_double(d) + " of branch point " +
                                               format_complex(r));
    }
  }
}

// Continues w along the path from w0 at the start (or at the end of the first
// segment when the path starts at a branch point).
inline FiberTrack continue_fiber(const BranchCurve& curve, const PlanarPath& path, Complex w0,
                                 const TrackOptions& opt = {}) {
  if (path.segments.empty()) throw Error(ErrorCode::NearBranch, "empty path");
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const Segment& s = path.segments[k];
    if ((s.branchStart && k != 0) || (s.branchEnd && k + 1 != path.segments.size()))
      throw Error(ErrorCode::NearBranch, "branch endpoints allowed only at the ends of a path");
  }
  check_clearance(curve, path);

  FiberTrack track;
  Complex w = w0;
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    detail::SegmentMap map(path.segments[k], curve);
    std::vector<std::pair<double, Complex>> pts;
    if (k == 0) {
      double vSeed = map.mode == 1 ? 1.0 : 0.0;
      Complex hs = map.h(vSeed);
      if (std::abs(w0 * w0 - hs) > opt.seedTol * std::max(1.0, std::abs(hs)))
        throw Error(ErrorCode::SeedOffCurve, "seed fiber does not satisfy the curve equation");
      Complex gSeed = nearest_sqrt(hs, w0);
      if (map.mode == 1) {
        pts = detail::track_segment(map, 1.0, 0.0, gSeed, opt);
        std::reverse(pts.begin(), pts.end());
      } else {
        pts = detail::track_segment(map, 0.0, 1.0, gSeed, opt);
      }
    } else {
      Complex gStart = nearest_sqrt(map.h(0.0), w);
      pts = detail::track_segment(map, 0.0, 1.0, gStart, opt);
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
      auto [v, g] = pts[j];
      if (j > 0) track.maxStep = std::max(track.maxStep, std::abs(v - pts[j - 1].first));
      track.nodes.push_back({int(k), v, map.z(v), map.w(v, g), g});
    }
    w = map.w(1.0, pts.back().second);
  }
  return track;
}

inline FiberTrack continue_fiber(const QuotientCurve& curve, const PlanarPath& path, Complex w0,
                                 const TrackOptions& opt = {}) {
  return continue_fiber(analytic_curve(curve), path, w0, opt);
}

struct QuadOptions {
  double absTol = 1e-11;
  double relTol = 0.0;
  int maxIntervals = 200000;
  TrackOptions track;
};

struct QuadResult {
  std::vector<Complex> values;
  double errorEstimate = 0.0;
  int intervals = 0;
  Complex endFiber;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452, 0.930157491355708226001207180059508,
    0.865063366688984510732096688423493, 0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784, 0.294392862701460198131126603103866,
    0.148874338981631210884826001129720, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390, 0.054755896574351996031381300244580,
    0.075039674810919952767043140916190, 0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208814869180, 0.134709217311473325928054001771707, 0.142775938577060080797094273138717,
    0.147739104901338491374841515972068, 0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                                             0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                                             0.295524224714752870173892994651338};

struct Interval {
  int seg;
  double v0, v1;
  Complex g0, g1;
  std::vector<Complex> value;
  double error;
  bool live;
};

template <class F>
void gk21(const SegmentMap& map, Interval& iv, int m, F& f, std::vector<Complex>& buf) {
  double c = 0.5 * (iv.v0 + iv.v1), hl = 0.5 * (iv.v1 - iv.v0);
  std::vector<Complex> kron(m, 0.0), gauss(m, 0.0);
  auto eval = [&](double x, double wk, double wgauss) {
    double v = c + hl * x;
    double t = (v - iv.v0) / (iv.v1 - iv.v0);
    Complex ref = iv.g0 + (iv.g1 - iv.g0) * t;
    Complex g = nearest_sqrt(map.h(v), ref);
    Complex meas = map.measure(v, g);
    f(map.z(v), buf.data());
    for (int i = 0; i < m; ++i) {
      Complex val = buf[i] * meas;
      kron[i] += wk * val;
      gauss[i] += wgauss * val;
    }
  };
  eval(0.0, kWgk[10], 0.0);
  for (int j = 0; j < 10; ++j) {
    double wgauss = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    eval(kXgk[j], kWgk[j], wgauss);
    eval(-kXgk[j], kWgk[j], wgauss);
  }
  iv.value.assign(m, 0.0);
  iv.error = 0.0;
  for (int i = 0; i < m; ++i) {
    iv.value[i] = kron[i] * hl;
    iv.error = std::max(iv.error, std::abs((kron[i] - gauss[i]) * hl));
  }
}

}  // namespace detail

// ∫ f_i(z) dz / w along the lifted path, for i = 0..m-1 simultaneously.
// f(z, out) writes the m numerator values at z.
template <class F>
QuadResult integrate_many(const BranchCurve& curve, const PlanarPath& path, Complex w0, int m, F&& f,
                          const QuadOptions& opt = {}) {
  FiberTrack track = continue_fiber(curve, path, w0, opt.track);
  std::vector<detail::SegmentMap> maps;
  maps.reserve(path.segments.size());
  for (const auto& s : path.segments) maps.emplace_back(s, curve);

  std::vector<detail::Interval> ivs;
  std::vector<Complex> buf(std::max(m, 1));
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry> heap;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < track.nodes.size(); ++k) {
    const FiberNode& a = track.nodes[k];
    const FiberNode& b = track.nodes[k + 1];
    if (a.segment != b.segment || b.v <= a.v) continue;
    int seg = a.segment;
    double v0 = a.v, v1 = b.v;
    Complex g0 = a.g, g1 = b.g;
    detail::Interval iv{seg, v0, v1, g0, g1, {}, 0.0, true};
    detail::gk21(maps[seg], iv, m, f, buf);
    total += iv.error;
    heap.emplace(iv.error, int(ivs.size()));
    ivs.push_back(std::move(iv));
  }

  auto current_sum = [&] {
    std::vector<Complex> s(m, 0.0);
    for (const auto& iv : ivs)
      if (iv.live)
        for (int i = 0; i < m; ++i) s[i] += iv.value[i];
    return s;
  };
  auto tolerance = [&] {
    if (opt.relTol <= 0.0) return opt.absTol;
    double mag = 0.0;
    for (const Complex& v : current_sum()) mag = std::max(mag, std::abs(v));
    return std::max(opt.absTol, opt.relTol * mag);
  };

  double tol = tolerance();
  int liveCount = int(ivs.size());
  int splits = 0;
  while (total > tol && !heap.empty()) {
    auto [err, idx] = heap.top();
    heap.pop();
    if (!ivs[idx].live) continue;
    detail::Interval parent = ivs[idx];
    double vm = 0.5 * (parent.v0 + parent.v1);
    if (vm <= parent.v0 || vm >= parent.v1 || parent.v1 - parent.v0 < 1e-15) {
      // Cannot refine further; accept the interval as is.
      total -= parent.error;
      ivs[idx].error = 0.0;
      continue;
    }
    if (liveCount >= opt.maxIntervals)
      throw Error(ErrorCode::NoConvergence, "quadrature budget exceeded (error " + format_double(total) + ")");
    const auto& map = maps[parent.seg];
    Complex gm = nearest_sqrt(map.h(vm), 0.5 * (parent.g0 + parent.g1));
    ivs[idx].live = false;
    total -= parent.error;
    detail::Interval left{parent.seg, parent.v0, vm, parent.g0, gm, {}, 0.0, true};
    detail::Interval right{parent.seg, vm, parent.v1, gm, parent.g1, {}, 0.0, true};
    detail::gk21(map, left, m, f, buf);
    detail::gk21(map, right, m, f, buf);
    total += left.error + right.error;
    heap.emplace(left.error, int(ivs.size()));
    ivs.push_back(std::move(left));
    heap.emplace(right.error, int(ivs.size()));
    ivs.push_back(std::move(right));
    ++liveCount;
    if (++splits % 256 == 0) {
      total = 0.0;
      for (const auto& iv : ivs)
        if (iv.live) total += iv.error;
      tol = tolerance();
    }
  }

  QuadResult res;
  res.values = current_sum();
  res.errorEstimate = std::max(total, 0.0);
  res.intervals = liveCount;
  res.endFiber = track.end_fiber();
  return res;
}

template <class F>
QuadResult integrate_many(const QuotientCurve& curve, const PlanarPath& path, Complex w0, int m, F&& f,
                          const QuadOptions& opt = {}) {
  return integrate_many(analytic_curve(curve), path, w0, m, std::forward<F>(f), opt);
}

struct InfinityExpansion {
  bool leadingOK = false;
  Complex D;
  Complex residueAtInfinity;
  std::vector<Complex> localCoefficients;  // Q/w = z^{-1/2} Σ c_k z^{-k}
};

// Series of Q(z)/w at ∞ with Q monic of the second-kind degree.
inline InfinityExpansion infinity_expansion(const std::vector<Complex>& numeratorRoots,
                                            const std::vector<Complex>& branchPoints, int order = 4) {
  int deg = int(branchPoints.size());
  int d = int(numeratorRoots.size());
  if (deg % 2 == 0 || 2 * d + 1 != deg)
    throw Error(ErrorCode::WrongDegree, "numerator degree " + std::to_string(d) + " does not match curve degree " +
                                            std::to_string(deg));
  // log f(v) with v = 1/z: f = Π(1 − ζv) · Π(1 − e v)^{-1/2}.
  std::vector<Complex> L(order + 1, 0.0), E(order + 1, 0.0);
  for (int mth = 1; mth <= order; ++mth) {
    Complex sz = 0.0, se = 0.0;
    for (const auto& z : numeratorRoots) sz += std::pow(z, mth);
    for (const auto& e : branchPoints) se += std::pow(e, mth);
    L[mth] = -(sz - 0.5 * se) / double(mth);
  }
  E[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    Complex acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += double(j) * L[j] * E[k - j];
    E[k] = acc / double(k);
  }
  InfinityExpansion out;
  out.localCoefficients = E;
  out.leadingOK = std::abs(E[0] - 1.0) == 0.0;
  out.D = E[1];
  // In u with u² = 1/z every term of Ω is an even power of u times du, so the
  // u^{-1} coefficient vanishes identically.
  out.residueAtInfinity = 0.0;
  return out;
}

inline InfinityExpansion infinity_expansion(const std::vector<Complex>& numeratorRoots, const QuotientCurve& curve,
                                            int order = 4) {
  return infinity_expansion(numeratorRoots, curve.smooth_branch_points(), order);
}

}  // namespace spectori
