#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "search.hpp"

namespace spectori {

enum class OutputFormat { Records, Csv };

struct RunConfig {
  std::string subcommand;
  Family family = Family::Odd;
  double R = 0.0;
  std::optional<int> n;
  std::vector<Complex> lambdas;  // upper-half-plane members
  std::optional<double> mu, nu;
  std::map<std::string, double> tolerances{{"quad", 1e-11}, {"rational", 1e-9}};
  long maxDen = 50;
  long maxInt = 1000;
  OutputFormat format = OutputFormat::Records;
  std::string output;  // empty: stdout
  bool dumpContours = false;

  // asymptotics
  std::string quantity = "b-next";
  CurveSign curve = CurveSign::Plus;
  std::vector<double> muList{1e2, 1e3, 1e4};

  // search
  std::vector<Rational> targetPlus, targetMinus;
  int chartPlus = 0, chartMinus = 0;

  // verify
  std::string candidateFile;
};

inline ModuliPoint config_point(const RunConfig& cfg) {
  if (cfg.n && *cfg.n != int(cfg.lambdas.size()))
    throw Error(ErrorCode::RejectRange, "--n " + std::to_string(*cfg.n) + " but " +
                                            std::to_string(cfg.lambdas.size()) + " --lambda values");
  ModuliPoint p = make_point(cfg.family, cfg.R, cfg.lambdas);
  if (cfg.mu || cfg.nu) p = with_degeneration(p, cfg.mu.value_or(0.0), cfg.nu.value_or(0.0));
  return p;
}

inline void validate_config(const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.tolerances)
    if (!(v > 0.0)) throw Error(ErrorCode::Parse, "tolerance '" + k + "' must be positive");
  if (cfg.maxDen < 1 || cfg.maxInt < 1) throw Error(ErrorCode::Parse, "--max-den and --max-int must be positive");
}

inline EvalOptions config_eval(const RunConfig& cfg, bool withHat) {
  EvalOptions e;
  e.quad.absTol = cfg.tolerances.at("quad");
  e.withHat = withHat;
  return e;
}

// One row of a check table.
struct TableRow {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double expected = 0.0;
  double tol = 0.0;
};

inline std::string short_number(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

inline std::vector<TableRow> base_check_rows(const EvalOptions& eval) {
  std::vector<TableRow> rows;
  auto row = [&](std::string name, double v, double e, double tol) {
    rows.push_back({std::move(name), std::abs(v - e) <= tol, v, e, tol});
  };
  {
    auto r = compute_invariants(make_even(), eval);
    const auto& I = r.data.periods;
    const auto& inv = r.invariants;
    row("even0.I+", I.plus[0], -8.0, 1e-10);
    row("even0.I-", I.minus[0], 8.0, 1e-10);
    row("even0.Ihat+", I.hatPlus[0], 8.0, 1e-10);
    row("even0.Ihat-", I.hatMinus[0], 8.0, 1e-10);
    row("even0.eta+", inv.etaPlus, -1.0, 1e-10);
    row("even0.eta-", inv.etaMinus, 1.0, 1e-10);
    row("even0.D+", inv.Dplus, -1.0, 1e-10);
    row("even0.D-", inv.Dminus, 1.0, 1e-10);
    for (double x : {0.0, 1.0, -1.0}) row("even0.T(" + short_number(x) + ")", inv.mobius(x), -(3 * x + 8) / (2 * x + 5), 1e-10);
  }
  for (double t : {0.1, 0.01}) {
    PeriodData d = evaluate(make_odd(2.0 + t), eval);
    const auto& I = d.periods;
    std::string tag = "odd0[t=" + short_number(t) + "].";
    row(tag + "I+[0]", I.plus[0], 4 * std::sqrt(t), 1e-9);
    row(tag + "I+[1]", I.plus[1], 4 * std::sqrt(4 + t), 1e-9);
    row(tag + "I-", I.minus[0], 8.0, 5 * t);
    row(tag + "s", d.omegaMinus.zetas[0].real() - 2.0, t, 5 * t * t);
    row(tag + "c-", d.hatMinus.hatCoefficients[0].real(), 0.0, 5 * t * t);
    row(tag + "Ihat+[0]", I.hatPlus[0], 12 * std::sqrt(t) + 8 * std::pow(t, 1.5), 1e-8);
    row(tag + "Ihat+[1]", I.hatPlus[1], 12 * std::sqrt(4 + t) + 8 * std::pow(4 + t, 1.5), 1e-8);
    row(tag + "Ihat-", I.hatMinus[0], -8.0, 5 * t);
  }
  return rows;
}

namespace detail {
inline void print_rows(std::ostream& out, const std::vector<TableRow>& rows, OutputFormat f) {
  if (f == OutputFormat::Csv) out << "name,pass,value,expected,tol\n";
  for (const auto& r : rows) {
    if (f == OutputFormat::Csv) {
      out << r.name << "," << (r.pass ? 1 : 0) << "," << format_double(r.value) << "," << format_double(r.expected)
          << "," << format_double(r.tol) << "\n";
    } else {
      Record rec("check");
      rec.add("name", r.name).add("pass", r.pass).add("value", r.value).add("expected", r.expected).add("tol", r.tol);
      out << rec.str() << "\n";
    }
  }
}

inline void dump_contours(std::ostream& out, const ModuliPoint& p, double delta) {
  ModuliPoint q = p.has_extra_pair() ? p.expanded() : p.base();
  CycleSystem cs = canonical_contours(q, delta, false);
  out << "curve,cycle,k,x,y\n";
  auto emit = [&](CurveSign s, const LiftedCycle& c) {
    auto pts = sample_path(c.path, 32);
    for (std::size_t k = 0; k < pts.size(); ++k)
      out << to_string(s) << "," << c.label.str() << "," << k << "," << format_double(pts[k].real()) << ","
          << format_double(pts[k].imag()) << "\n";
  };
  for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) {
    for (const auto& a : cs.on(s).a) emit(s, a);
    for (const auto& b : cs.on(s).b) emit(s, b);
  }
  for (const auto& c : cs.openCurves) emit(c.curveSign, c);
  if (p.is_degenerate())
    for (CurveSign s : {CurveSign::Plus, CurveSign::Minus}) emit(s, degenerate_b_cycle(p, s, delta));
}

inline AsymptoticQuantity parse_quantity(const std::string& s) {
  if (s == "b-next") return AsymptoticQuantity::BNextPeriod;
  if (s == "hat-b-next") return AsymptoticQuantity::HatBNext;
  if (s == "kappa") return AsymptoticQuantity::Kappa;
  if (s == "nu-second") return AsymptoticQuantity::NuSecond;
  throw Error(ErrorCode::Parse, "unknown quantity '" + s + "' (b-next, hat-b-next, kappa, nu-second)");
}

inline int run_periods(const RunConfig& cfg, std::ostream& out) {
  ModuliPoint p = config_point(cfg);
  Record rec("periods");
  rec.add("family", to_string(p.family)).add("n", p.n);
  if (p.degeneration) {
    PeriodData d = evaluate(p, config_eval(cfg, false));
    rec.add("I+", join_values(d.periods.plus)).add("I-", join_values(d.periods.minus));
    rec.add("realness", d.periods.realnessResidual);
  } else {
    EvalOptions e = variation_eval_options(std::min(cfg.tolerances.at("quad"), 1e-13));
    InvariantResult r = compute_invariants(p, e);
    const auto& I = r.data.periods;
    const auto& inv = r.invariants;
    rec.add("I+", join_values(I.plus)).add("I-", join_values(I.minus));
    rec.add("Ihat+", join_values(I.hatPlus)).add("Ihat-", join_values(I.hatMinus));
    rec.add("D+", inv.Dplus).add("D-", inv.Dminus);
    rec.add("eta+", inv.etaPlus).add("eta-", inv.etaMinus);
    if (p.family == Family::Odd) rec.add("chi", inv.chi);
    if (!inv.xis.empty()) rec.add("xi", join_values(inv.xis));
    rec.add("T", join_values(std::vector<double>{inv.mobius.a, inv.mobius.b, inv.mobius.c, inv.mobius.d}));
    rec.add("realness", I.realnessResidual).add("residual", inv.residual).add("cond", inv.conditionNumber);
  }
  out << rec.str() << "\n";
  if (cfg.dumpContours) dump_contours(out, p, 0.0);
  return 0;
}

inline int run_asymptotics(const RunConfig& cfg, std::ostream& out) {
  ModuliPoint p = config_point(cfg);
  AsymptoticQuantity q = parse_quantity(cfg.quantity);
  ProbeOptions opt;
  if (q == AsymptoticQuantity::HatBNext) {
    InvariantSet inv = compute_invariants(p.base()).invariants;
    opt.eta = cfg.curve == CurveSign::Plus ? inv.etaPlus : inv.etaMinus;
  }
  AsymptoticFit fit = asymptotic_probe(p, q, cfg.curve, cfg.muList, opt);
  if (cfg.format == OutputFormat::Csv) {
    out << "mu,value_re,value_im,predicted_re,predicted_im,residual,scaled_residual\n";
    for (const auto& s : fit.samples)
      out << format_double(s.mu) << "," << format_double(s.value.real()) << "," << format_double(s.value.imag()) << ","
          << format_double(s.predicted.real()) << "," << format_double(s.predicted.imag()) << ","
          << format_double(s.residual) << "," << format_double(s.scaledResidual) << "\n";
  } else {
    for (const auto& s : fit.samples) {
      Record r("sample");
      r.add("mu", s.mu).add("value", s.value).add("predicted", s.predicted).add("residual", s.residual);
      r.add("scaled", s.scaledResidual).add("next", s.nextCoefficient);
      out << r.str() << "\n";
    }
  }
  Record f("fit");
  f.add("quantity", to_string(q)).add("curve", to_string(cfg.curve)).add("unit", fit.unit);
  f.add("leading", fit.fittedLeading).add("order", fit.fittedOrder).add("expected_order", fit.expectedOrder);
  f.add("predicted_next", fit.predictedNext);
  out << (cfg.format == OutputFormat::Csv ? "# " : "") << f.str() << "\n";
  return 0;
}

inline RationalTarget explicit_target(const std::vector<Rational>& ratios, int chart, long maxDen) {
  RationalTarget t;
  t.chart = chart;
  t.ratios = ratios;
  t.maxDenominator = maxDen;
  return t;
}

inline int run_search(const RunConfig& cfg, std::ostream& out) {
  ModuliPoint p = config_point(cfg);
  EvalOptions e = variation_eval_options(std::min(cfg.tolerances.at("quad"), 1e-13));
  e.withHat = false;
  PeriodVector v = period_vectors(p, e);
  ChartTarget target;
  target.plus = cfg.targetPlus.empty() ? rational_project(v.plus, cfg.maxDen, cfg.chartPlus)
                                       : explicit_target(cfg.targetPlus, cfg.chartPlus, cfg.maxDen);
  target.minus = cfg.targetMinus.empty() ? rational_project(v.minus, cfg.maxDen, cfg.chartMinus)
                                         : explicit_target(cfg.targetMinus, cfg.chartMinus, cfg.maxDen);
  auto ratio_list = [](const RationalTarget& t) {
    std::string s;
    for (const auto& r : t.ratios) s += (s.empty() ? "" : ",") + r.str();
    return s.empty() ? std::string("-") : s;
  };
  Record tr("target");
  tr.add("plus", ratio_list(target.plus)).add("chart_plus", target.plus.chart);
  tr.add("minus", ratio_list(target.minus)).add("chart_minus", target.minus.chart);
  out << tr.str() << "\n";
  NewtonResult nr = newton_to_rational(p, target, {}, e);
  Record nrec("newton");
  nrec.add("iterations", nr.iterations).add("residual", nr.residual);
  out << nrec.str() << "\n";
  ScaleOptions so;
  so.maxDen = cfg.maxDen;
  so.maxInt = cfg.maxInt;
  so.tolRational = cfg.tolerances.at("rational");
  so.eval = e;
  out << to_record(scale_and_type(nr.point, so)).str() << "\n";
  return 0;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.candidateFile.empty()) throw Error(ErrorCode::Parse, "verify needs --candidate FILE");
  std::ifstream in(cfg.candidateFile);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + cfg.candidateFile + "'");
  std::string line;
  int lineNo = 0, count = 0;
  bool all = true;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    SpectralCandidate c;
    try {
      ParsedRecord rec = parse_record(line);
      if (rec.kind != "candidate") continue;
      c = candidate_from_record(rec);
    } catch (const Error& e) {
      throw Error(e.code(), cfg.candidateFile + ":" + std::to_string(lineNo) + ": " + e.what());
    }
    VerifyOptions vo;
    vo.eval = variation_eval_options(std::min(cfg.tolerances.at("quad"), 1e-13));
    VerificationReport rep = verify_candidate(c, vo);
    for (const auto& r : to_records(rep)) out << r.str() << "\n";
    all = all && rep.overall;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::Parse, cfg.candidateFile + ": no candidate records");
  return all ? 0 : 2;
}
}  // namespace detail

// Exit status: 0 success, 2 failed checks, 1 errors.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
    std::ostringstream buf;
    int status = 0;
    if (cfg.subcommand == "base-check") {
      auto rows = base_check_rows(config_eval(cfg, true));
      detail::print_rows(buf, rows, cfg.format);
      for (const auto& r : rows) status = r.pass ? status : 2;
    } else if (cfg.subcommand == "periods") {
      status = detail::run_periods(cfg, buf);
    } else if (cfg.subcommand == "asymptotics") {
      status = detail::run_asymptotics(cfg, buf);
    } else if (cfg.subcommand == "search") {
      status = detail::run_search(cfg, buf);
    } else if (cfg.subcommand == "verify") {
      status = detail::run_verify(cfg, buf);
    } else if (cfg.subcommand == "dump-contours") {
      detail::dump_contours(buf, config_point(cfg), 0.0);
    } else {
      throw Error(ErrorCode::Parse, "unknown subcommand '" + cfg.subcommand + "'");
    }
    if (cfg.output.empty()) {
      out << buf.str();
    } else {
      std::ofstream f(cfg.output);
      if (!f) throw Error(ErrorCode::Io, "cannot write '" + cfg.output + "'");
      f << buf.str();
    }
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spectori
