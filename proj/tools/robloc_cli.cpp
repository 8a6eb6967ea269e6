#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "robloc/bench.hpp"
#include "robloc/bounds.hpp"
#include "robloc/config.hpp"
#include "robloc/errors.hpp"
#include "robloc/orderliness.hpp"

using namespace robloc;

namespace {

std::string read_file(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), {}};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, fmt::format("cannot write '{}'", path));
  out << text;
}

// Config file plus command-line overrides; only flags actually given are applied.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { flags[key] = v; }, help);
  }
  Config build() const {
    Config c = file.empty() ? Config{} : Config::load(file);
    for (const auto& [k, v] : flags) c.set(k, v);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::config, fmt::format("--set expects key=value, got '{}'", s));
      c.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return c;
  }
};

void add_common(CLI::App* app, ConfigArgs& a) {
  app->add_option("-c,--config", a.file, "key = value config file");
  app->add_option("--set", a.sets, "override a config key (key=value)");
  a.add(app, "--seed", "seed", "base seed");
  a.add(app, "-o,--output", "output", "output path (default stdout)");
}

DistributionSpec dist_from(const Config& c, const std::string& fallback_family) {
  Family f = parse_family(c.get("family", fallback_family));
  double scale = c.get_double("scale", 1.0);
  double loc = c.get_double("location", 0.0);
  DistributionSpec d;
  if (c.has("kappa")) d = solve_param_for_kurtosis(f, c.get_double("kappa", 0.0), scale);
  else d = DistributionSpec::make(f, c.get_double("shape", 1.0), scale);
  return d.affine(1.0, loc);
}

std::vector<std::string> sweep_meta(const SweepConfig& s, const char* what) {
  return {fmt::format("run = {}", what), fmt::format("n = {}", s.n),
          fmt::format("mode = {}", s.mode == SampleMode::quasi ? "quasi" : "pseudo"),
          fmt::format("seed = {}", s.seed), fmt::format("reps = {}", s.reps),
          fmt::format("paper_scale = {}", s.paper_scale ? 1 : 0)};
}

std::string bound_cell(const BoundValue& b) { return b.infinite ? "inf" : csv_real(b.value); }

std::vector<double> doubles_or(const Config& c, const std::string& key, std::vector<double> d) {
  return c.has(key) ? c.get_doubles(key) : d;
}

int run_bounds(const Config& c) {
  std::string table = c.get("table", "qa");
  std::ostringstream o;
  auto gammas = doubles_or(c, "gamma", {0.0, 0.25, 0.5, 0.75, 1.0});
  if (table == "qa") {
    std::size_t pts = c.get_size("points", 1000);
    o << "# robloc bounds v1\nepsilon,gamma,sup_general,sup_unimodal\n";
    for (double g : gammas) {
      double top = 1.0 / (1.0 + g);
      for (std::size_t i = 0; i <= pts; ++i) {
        double e = top * static_cast<double>(i) / static_cast<double>(pts);
        std::string uni;
        if (g < 5.0) uni = bound_cell(sup_qa_unimodal(e, g));
        o << csv_real(e) << ',' << csv_real(g) << ',' << bound_cell(sup_qa_general(e, g)) << ',' << uni << '\n';
      }
    }
  } else if (table == "concentration") {
    double t = c.get_double("t", 0.0);
    std::size_t n = c.get_size("n", 100);
    auto ks = doubles_or(c, "k", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    o << "# robloc concentration v1\ngamma,t,n,k,bound,k_lo,k_hi\n";
    for (double g : gammas) {
      auto [lo, hi] = monotone_k_interval(g, t);
      for (double k : ks) {
        BoundQuery q{0.0, g, k, t, n, 1.0};
        o << csv_real(g) << ',' << csv_real(t) << ',' << n << ',' << csv_real(k) << ','
          << csv_real(concentration_bound(q)) << ',' << csv_real(lo) << ',' << csv_real(hi) << '\n';
      }
    }
  } else if (table == "hl-exp") {
    double lambda = c.get_double("lambda", 1.0);
    o << "lambda,hl2_median\n" << csv_real(lambda) << ',' << csv_real(expected_hl_exponential(lambda)) << '\n';
  } else {
    throw Error(ErrorKind::config, fmt::format("unknown bounds table '{}' (qa, concentration, hl-exp)", table));
  }
  emit(o.str(), c.get("output"));
  return 0;
}

void report_text(std::ostringstream& o, const OrderlinessReport& r, const std::string& what) {
  o << "# robloc orderliness v1\n# check = " << what << "\n# nu = " << r.nu << "\n# gamma = " << csv_real(r.gamma)
    << "\n# holds = " << (r.holds ? 1 : 0) << "\n# points = " << r.points_checked
    << "\n# tolerance = " << csv_real(r.tolerance) << "\n# worst_residual = " << csv_real(r.worst_residual)
    << "\n# violations = " << r.violations.size() << '\n';
  if (!r.k_values.empty()) {
    o << "k,estimate,se\n";
    for (std::size_t i = 0; i < r.k_values.size(); ++i)
      o << csv_real(r.k_values[i]) << ',' << csv_real(r.estimates[i]) << ',' << csv_real(r.standard_errors[i])
        << '\n';
  }
  o << "epsilon,order,residual\n";
  for (const auto& v : r.violations) o << csv_real(v.epsilon) << ',' << v.order << ',' << csv_real(v.residual) << '\n';
}

int run_orderliness(const Config& c) {
  double gamma = c.get_double("gamma", 1.0);
  GridSpec grid;
  grid.points = c.get_size("points", grid.points);
  grid.eps_min = c.get_double("eps_min", grid.eps_min);
  if (c.has("eps_max")) grid.eps_max = c.get_double("eps_max", 0.0);
  grid.tail = c.get_bool("tail", true);
  std::optional<double> tol;
  if (c.has("tol")) tol = c.get_double("tol", 0.0);
  std::ostringstream o;
  OrderlinessReport r;
  std::string what;
  if (c.has("k")) {
    auto ks = c.get_doubles("k");
    DistributionSpec d = dist_from(c, "exponential");
    r = check_u_orderliness(d, gamma, ks, c.get_size("n", 100000), c.get_size("budget", 1000000),
                            c.get_u64("seed", 1));
    what = "u";
  } else {
    QuantileSource q = c.has("table") ? QuantileSource::from_table(read_file(c.get("table")))
                                      : QuantileSource::from(dist_from(c, "exponential"));
    if (c.has("target")) {
      auto t = parse_inequality_target(c.get("target"));
      r = check_weighted_inequality(q, t, gamma, grid, tol);
      what = to_string(t);
    } else {
      r = check_nu_gamma_orderliness(q, static_cast<int>(c.get_size("nu", 1)), gamma, grid, tol);
      what = "nu";
    }
  }
  report_text(o, r, what);
  emit(o.str(), c.get("output"));
  return 0;
}

int exit_code(ErrorKind k) {
  if (k == ErrorKind::config) return 2;
  if (k == ErrorKind::capacity) return 4;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust location estimators: estimates, sweeps, bounds, orderliness checks"};
  app.require_subcommand(1);

  ConfigArgs est_a, sweep_a, se_a, var_a, bd_a, bnd_a, ord_a;
  bool paper_scale = false, se_paper_scale = false;

  auto* est = app.add_subcommand("estimate", "one estimator on a data file (one real per line)");
  add_common(est, est_a);
  est_a.add(est, "-d,--data", "data", "data file, '-' for stdin");
  est_a.add(est, "-e,--estimator", "estimator", "estimator, e.g. \"tm eps=1/8\" or mHLM");

  auto* sweep = app.add_subcommand("sweep", "bias sweep over kurtosis grids");
  add_common(sweep, sweep_a);
  for (auto* sc : {sweep}) {
    sweep_a.add(sc, "--families", "families", "comma-separated families");
    sweep_a.add(sc, "--kappa", "kappa", "comma-separated kurtosis targets");
    sweep_a.add(sc, "--shape", "shape", "comma-separated shape values");
    sweep_a.add(sc, "--roster", "roster", "comma-separated estimators (eighth expands to the eps = 1/8 set)");
    sweep_a.add(sc, "-n,--n", "n", "sample size");
    sweep_a.add(sc, "--mode", "mode", "quasi or pseudo");
  }
  sweep->add_flag("--paper-scale", paper_scale, "n = 3686000");

  auto* se = app.add_subcommand("se-study", "standard errors from seeded pseudo samples");
  add_common(se, se_a);
  se_a.add(se, "--families", "families", "comma-separated families");
  se_a.add(se, "--kappa", "kappa", "comma-separated kurtosis targets");
  se_a.add(se, "--shape", "shape", "comma-separated shape values");
  se_a.add(se, "--roster", "roster", "comma-separated estimators");
  se_a.add(se, "-n,--n", "n", "sample size");
  se_a.add(se, "-r,--reps", "reps", "replications");
  se->add_flag("--paper-scale", se_paper_scale, "reps = 1000");

  auto* var = app.add_subcommand("variance-compare", "mHLM against MoM on the same samples");
  add_common(var, var_a);
  var_a.add(var, "--family", "family", "family");
  var_a.add(var, "--shape", "shape", "shape parameter");
  var_a.add(var, "--kappa", "kappa", "kurtosis target instead of shape");
  var_a.add(var, "-k,--k", "k", "kernel order and block count");
  var_a.add(var, "-n,--n", "n", "sample size");
  var_a.add(var, "-r,--reps", "reps", "replications");
  var_a.add(var, "--budget", "budget", "bootstrap budget for mHLM");

  auto* bd = app.add_subcommand("breakdown", "replace the top fraction of a sample and watch the estimate");
  add_common(bd, bd_a);
  bd_a.add(bd, "-e,--estimator", "estimator", "estimator");
  bd_a.add(bd, "--family", "family", "base family");
  bd_a.add(bd, "--shape", "shape", "shape parameter");
  bd_a.add(bd, "-n,--n", "n", "sample size");
  bd_a.add(bd, "--fractions", "fractions", "comma-separated contamination fractions");
  bd_a.add(bd, "--magnitude", "magnitude", "replacement value");

  auto* bnd = app.add_subcommand("bounds", "tabulate bias bounds");
  add_common(bnd, bnd_a);
  bnd_a.add(bnd, "--table", "table", "qa, concentration or hl-exp");
  bnd_a.add(bnd, "--gamma", "gamma", "comma-separated gamma values");
  bnd_a.add(bnd, "--points", "points", "epsilon grid intervals");
  bnd_a.add(bnd, "--t", "t", "deviation t for the concentration bound");
  bnd_a.add(bnd, "-k,--k", "k", "comma-separated k values");
  bnd_a.add(bnd, "-n,--n", "n", "sample size for the concentration bound");
  bnd_a.add(bnd, "--lambda", "lambda", "exponential scale");

  auto* ord = app.add_subcommand("orderliness", "numerical orderliness checks");
  add_common(ord, ord_a);
  ord_a.add(ord, "--family", "family", "family");
  ord_a.add(ord, "--shape", "shape", "shape parameter");
  ord_a.add(ord, "--table", "table", "two-column (p, Q(p)) file");
  ord_a.add(ord, "--nu", "nu", "order");
  ord_a.add(ord, "--gamma", "gamma", "gamma");
  ord_a.add(ord, "--target", "target", "tm, wm, bwm or sqm_vs_bm2");
  ord_a.add(ord, "-k,--k", "k", "comma-separated kernel orders (U-orderliness)");
  ord_a.add(ord, "-n,--n", "n", "sample size (U-orderliness)");
  ord_a.add(ord, "--budget", "budget", "bootstrap budget (U-orderliness)");
  ord_a.add(ord, "--points", "points", "grid points");
  ord_a.add(ord, "--tol", "tol", "tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*est) {
      Config c = est_a.build();
      RosterEntry e = parse_roster_entry(c.get("estimator", "median"));
      if (!c.has("data")) throw Error(ErrorKind::config, "estimate needs --data");
      std::vector<double> v;
      std::istringstream in(read_file(c.get("data")));
      std::string line;
      while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        v.push_back(parse_double(line, "data value"));
      }
      double x = evaluate(e, SortedSample::from_unsorted(std::move(v)), c.get_u64("seed", 1));
      emit(fmt::format("estimator,estimate\n{},{}\n", csv_field(e.id), csv_real(x)), c.get("output"));
    } else if (*sweep) {
      Config c = sweep_a.build();
      if (paper_scale) c.set("paper_scale", "1");
      SweepConfig s = sweep_config_from(c, false);
      emit(results_csv(run_bias_sweep(s), sweep_meta(s, "bias sweep")), s.output);
    } else if (*se) {
      Config c = se_a.build();
      if (se_paper_scale) c.set("paper_scale", "1");
      SweepConfig s = sweep_config_from(c, true);
      emit(results_csv(run_se_study(s), sweep_meta(s, "se study")), s.output);
    } else if (*var) {
      Config c = var_a.build();
      if (!c.has("shape") && !c.has("kappa") && c.get("family", "lognormal") == "lognormal") c.set("shape", "1");
      DistributionSpec d = dist_from(c, "lognormal");
      std::size_t k = c.get_size("k", 2), n = c.get_size("n", 1024), reps = c.get_size("reps", 1000);
      auto seed = c.get_u64("seed", 1);
      auto v = run_variance_compare(d, k, n, reps, seed, c.get_size("budget", 0));
      emit(variance_csv(v, {fmt::format("family = {}", to_string(d.family)), fmt::format("shape = {}", d.shape),
                            fmt::format("k = {}", k), fmt::format("n = {}", n), fmt::format("reps = {}", reps),
                            fmt::format("seed = {}", seed)}),
           c.get("output"));
    } else if (*bd) {
      Config c = bd_a.build();
      RosterEntry e = parse_roster_entry(c.get("estimator", "mean"));
      DistributionSpec d = dist_from(c, "gaussian");
      auto fr = doubles_or(c, "fractions", {0.0, 0.001, 0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5});
      std::size_t n = c.get_size("n", 10000);
      auto seed = c.get_u64("seed", 1);
      double mag = c.get_double("magnitude", 1e12);
      auto p = run_breakdown_probe(e, d, n, fr, mag, seed);
      emit(breakdown_csv(e, p, {fmt::format("n = {}", n), fmt::format("magnitude = {}", csv_real(mag)),
                                fmt::format("seed = {}", seed), fmt::format("breakdown = {}", csv_real(e.breakdown()))}),
           c.get("output"));
    } else if (*bnd) {
      return run_bounds(bnd_a.build());
    } else if (*ord) {
      return run_orderliness(ord_a.build());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
