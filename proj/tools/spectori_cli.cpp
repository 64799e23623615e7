#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "spectori/cli.hpp"

using namespace spectori;

namespace {

Complex parse_lambda(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.size() != 2) throw Error(ErrorCode::Parse, "--lambda expects re,im but got '" + s + "'");
  return {parse_double(parts[0], "lambda re"), parse_double(parts[1], "lambda im")};
}

std::vector<Rational> parse_ratios(const std::string& s) {
  std::vector<Rational> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_rational(part));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periods, invariants and rational searches on the quotient curves C+ and C-"};
  app.set_config("--config", "", "INI/TOML file with option values (command-line flags win)");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string family = "odd", format = "records", curve = "plus";
  std::vector<std::string> lambdas;
  std::string targetPlus, targetMinus;
  double tolQuad = cfg.tolerances["quad"], tolRational = cfg.tolerances["rational"];
  int n = -1;
  double mu = 0.0, nu = 0.0;

  app.add_option("--family", family, "odd or even")->check(CLI::IsMember({"odd", "even"}));
  app.add_option("--n", n, "number of conjugate pairs (checked against --lambda)");
  app.add_option("--R", cfg.R, "odd family branch point R > 2");
  app.add_option("--lambda", lambdas, "upper-half-plane member of a pair as re,im (repeatable)")->take_all();
  auto* muOpt = app.add_option("--mu", mu, "real part of the added pair");
  auto* nuOpt = app.add_option("--nu", nu, "imaginary part of the added pair (0 for the node)");
  app.add_option("--tol-quad", tolQuad, "absolute quadrature tolerance");
  app.add_option("--tol-rational", tolRational, "rationality tolerance");
  app.add_option("--max-den", cfg.maxDen, "largest denominator for rational targets");
  app.add_option("--max-int", cfg.maxInt, "largest integer period");
  app.add_flag("--dump-contours", cfg.dumpContours, "append contour polylines as CSV");
  app.add_option("--format", format, "records or csv")->check(CLI::IsMember({"records", "csv"}));
  app.add_option("--output,-o", cfg.output, "write to this file instead of stdout");

  app.add_subcommand("base-check", "genus 0 and genus 1 closed-form table");
  app.add_subcommand("periods", "I, Ihat, D, eta, T at a point");
  auto* asym = app.add_subcommand("asymptotics", "large-mu expansions");
  asym->add_option("--quantity", cfg.quantity, "b-next, hat-b-next, kappa or nu-second");
  asym->add_option("--curve", curve, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  asym->add_option("--mu-list", cfg.muList, "radii")->delimiter(',');
  auto* search = app.add_subcommand("search", "Newton to rational period ratios, then scale");
  search->add_option("--target-plus", targetPlus, "ratios p/q of I+ in its chart, comma separated");
  search->add_option("--target-minus", targetMinus, "ratios p/q of I- in its chart, comma separated");
  search->add_option("--chart-plus", cfg.chartPlus, "index of the I+ chart entry");
  search->add_option("--chart-minus", cfg.chartMinus, "index of the I- chart entry");
  auto* verify = app.add_subcommand("verify", "check candidate records");
  verify->add_option("--candidate", cfg.candidateFile, "file with candidate records")->required();
  app.add_subcommand("dump-contours", "contour polylines as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.family = parse_family(family);
    if (n >= 0) cfg.n = n;
    for (const auto& s : lambdas) cfg.lambdas.push_back(parse_lambda(s));
    if (muOpt->count() || nuOpt->count()) {
      cfg.mu = mu;
      cfg.nu = nu;
    }
    cfg.tolerances["quad"] = tolQuad;
    cfg.tolerances["rational"] = tolRational;
    cfg.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Records;
    cfg.curve = curve == "minus" ? CurveSign::Minus : CurveSign::Plus;
    cfg.targetPlus = parse_ratios(targetPlus);
    cfg.targetMinus = parse_ratios(targetMinus);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return run(cfg, std::cout, std::cerr);
}
