// Acceptance criteria 1-12. One PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "robloc/bench.hpp"
#include "robloc/bounds.hpp"
#include "robloc/distmodel.hpp"
#include "robloc/estimators.hpp"
#include "robloc/kernels.hpp"
#include "robloc/orderliness.hpp"

using namespace robloc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const std::vector<double> kGammas{0.0, 0.25, 0.5, 0.75, 1.0};

Outcome c1_exponential_hl() {
  auto t0 = std::chrono::steady_clock::now();
  auto sv = draw_sample(DistributionSpec::make(Family::exponential, 1, 1), 1000000, SampleMode::quasi);
  KernelSpec ks;
  ks.k = 2;
  ks.budget = 10000000;
  ks.seed = 1;
  double est = weighted_hl_mean(SortedSample::from_sorted(std::move(sv.values)), ks, EstimatorKind::median);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = std::fabs(est - 0.8392) <= 0.005;
  return {ok, fmt::format("mHLM_k=2 = {:.5f} (target 0.8392 +- 0.005), {:.1f} s{}", est, secs,
                          secs < 60 ? "" : " (over the 60 s runtime target)")};
}

Outcome c2_closed_form() {
  double closed = expected_hl_exponential(1);
  auto cdf = [](double x) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double t) { return 4 * t * std::exp(-2 * t); }, 0.0, x, 15, 1e-15);
  };
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve([&](double x) { return cdf(x) - 0.5; }, 0.1, 3.0,
                                             boost::math::tools::eps_tolerance<double>(50), it);
  double root = 0.5 * (r.first + r.second);
  bool ok = std::fabs(root - closed) <= 1e-8;
  return {ok, fmt::format("closed form {:.12f}, numeric root {:.12f}, diff {:.2e}", closed, root, std::fabs(root - closed))};
}

Outcome c3_bound_monotonicity() {
  double worst = 0, seam = 0;
  for (double g : kGammas) {
    double top = 1 / (1 + g), pg = INFINITY, pu = INFINITY;
    for (int i = 1; i <= 1000; ++i) {
      double e = top * i / 1000;
      double vg = sup_qa_general(e, g).value, vu = sup_qa_unimodal(e, g).value;
      worst = std::max({worst, vg - pg, vu - pu});
      pg = vg;
      pu = vu;
    }
  }
  for (int i = 0; i < 500; ++i) {
    double g = 5.0 * i / 500;
    seam = std::max(seam, std::fabs(unimodal_branch1(1.0 / 6, g) - unimodal_branch2(1.0 / 6, g)));
  }
  bool ok = worst <= 1e-12 && seam <= 1e-12;
  return {ok, fmt::format("largest increase {:.2e}, seam gap {:.2e}", std::max(worst, 0.0), seam)};
}

Outcome c4_concentration() {
  double worst = 0;
  int cells = 0;
  for (double g : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0})
    for (double t : {0.0, 0.25, 0.5, 0.9}) {
      if (t * t >= g + 1) continue;
      auto [a, b] = monotone_k_interval(g, t);
      for (std::size_t n : {20u, 200u, 5000u}) {
        double prev = INFINITY;
        for (int i = 0; i < 100; ++i) {
          double k = a + (b - a) * i / 99;
          if (k < 1 || k > static_cast<double>(n)) continue;
          double v = concentration_bound({0, g, k, t, n, 1});
          worst = std::max(worst, v - prev);
          prev = v;
        }
        ++cells;
      }
    }
  auto [lo, hi] = monotone_k_interval(1, 0);
  bool ok = worst <= 0 && lo == 2.0 && hi == 6.0;
  return {ok, fmt::format("{} (gamma, t, n) cells, largest increase {:.2e}, interval(1, 0) = ({}, {})", cells,
                          std::max(worst, 0.0), lo, hi)};
}

SortedSample random_sample(std::mt19937_64& g, std::size_t n) {
  std::lognormal_distribution<double> d(0, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return SortedSample::from_unsorted(std::move(v));
}

Outcome c5_identities() {
  std::mt19937_64 g(5);
  int bad = 0;
  double worst = 0;
  auto cmp = [&](double a, double b, double scale) {
    double d = std::fabs(a - b);
    worst = std::max(worst, d / scale);
    if (d > 16 * std::numeric_limits<double>::epsilon() * scale) ++bad;
  };
  for (int t = 0; t < 100; ++t) {
    auto s = random_sample(g, 48);
    double scale = s.x(48);
    cmp(binomial_mean(s, {0.25, 1, 1}), block_winsorized_mean(s, {0.25}), scale);
    for (double e : {1.0 / 8, 1.0 / 12, 1.0 / 24}) cmp(binomial_mean(s, {e, 1, 2}), stratified_mean(s, {e, 1, 3, 3}), scale);
    for (double e : {5.0 / 24, 0.25, 1.0 / 3}) cmp(stratified_mean(s, {e, 1, 3, 3}), trimmed_mean(s, {e}), scale);
    cmp(stratified_quantile_mean(s, {0.25}), 0.5 * (s.x(12) + s.x(36)), scale);
  }
  return {bad == 0, fmt::format("{} mismatches over 100 samples, worst relative gap {:.2e}", bad, worst)};
}

std::vector<RosterEntry> property_roster(double eps) {
  std::vector<std::string> specs{"mean", "median",
                                 fmt::format("qa eps={} conv=midpoint", eps),
                                 fmt::format("qa eps={} defn=upper conv=midpoint", eps),
                                 fmt::format("tm eps={}", eps), fmt::format("wm eps={}", eps),
                                 fmt::format("bwm eps={}", eps), fmt::format("sm eps={} b=3", eps),
                                 fmt::format("sm eps={} b=5", eps), fmt::format("bm eps={} nu=1", eps),
                                 fmt::format("bm eps={} nu=2", eps), fmt::format("bm eps={} nu=3", eps),
                                 fmt::format("sqm eps={} conv=midpoint", nearest_sqm_epsilon(eps, 1)),
                                 "HL", "hl wa=tm k=3 eps=0.1", "hl wa=wm k=2 eps=0.1"};
  std::vector<RosterEntry> r;
  for (const auto& s : specs) r.push_back(parse_roster_entry(s));
  return r;
}

Outcome c6_equivariance_symmetry() {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(0, 1);
  int eq_bad = 0, sym_bad = 0, checks = 0;
  std::string first;
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 20 + g() % 120;
    double eps = 0.02 + 0.2 * u(g);
    auto s = random_sample(g, n);
    double lam = 0.1 + 10 * u(g), mu = 200 * u(g) - 100;
    auto y = s.affine(lam, mu);
    // mirrored sample around c
    double c = 10 * u(g) - 5;
    std::vector<double> m;
    for (std::size_t i = 1; i <= n / 2; ++i) {
      m.push_back(c + s.x(i));
      m.push_back(c - s.x(i));
    }
    auto ms = SortedSample::from_unsorted(m);
    for (const auto& e : property_roster(eps)) {
      ++checks;
      std::uint64_t seed = t;
      double a = evaluate(e, s, seed), b = evaluate(e, y, seed);
      if (std::fabs(b - (lam * a + mu)) > 1e-12 * (lam * s.x(n) + std::fabs(mu))) {
        ++eq_bad;
        if (first.empty()) first = e.id;
      }
      double v = evaluate(e, ms, seed);
      if (std::fabs(v - c) > 1e-12 * (std::fabs(c) + ms.x(ms.size()) - ms.x(1))) {
        ++sym_bad;
        if (first.empty()) first = e.id;
      }
    }
  }
  return {eq_bad == 0 && sym_bad == 0,
          fmt::format("{} estimator checks over 200 trials: {} equivariance, {} symmetry failures{}", checks, eq_bad,
                      sym_bad, first.empty() ? "" : " (first: " + first + ")")};
}

Outcome c7_inequalities() {
  int fails = 0, runs = 0;
  double worst = 0;
  std::string where;
  for (auto d : {DistributionSpec::make(Family::exponential, 1, 1), DistributionSpec::make(Family::pareto, 3, 1)})
    for (double g : {0.0, 0.5, 1.0})
      for (auto t : {InequalityTarget::tm, InequalityTarget::wm, InequalityTarget::bwm, InequalityTarget::sqm_vs_bm2}) {
        auto r = check_weighted_inequality(QuantileSource::from(d), t, g, GridSpec{1024}, 1e-9);
        ++runs;
        worst = std::min(worst, r.worst_residual);
        if (!r.holds) {
          ++fails;
          where += fmt::format(" {}:{}:{}", to_string(d.family), to_string(t), g);
        }
      }
  return {fails == 0, fmt::format("{} chains checked, {} failed{}, most negative slack {:.2e}", runs, fails, where, worst)};
}

Outcome c8_orderliness() {
  struct Item {
    std::string name;
    std::function<bool()> ok;
  };
  auto holds = [](Family f, double sh, int nu, double g) {
    return check_nu_gamma_orderliness(QuantileSource::from(DistributionSpec::make(f, sh, 1)), nu, g).holds;
  };
  std::vector<Item> items{
      {"exponential nu=2 holds", [&] { return holds(Family::exponential, 1, 2, 1); }},
      {"pareto a=2 nu=4 g=0.5 holds", [&] { return holds(Family::pareto, 2, 4, 0.5); }},
      {"gaussian flat to 1e-9",
       [&] {
         double m = 0;
         for (auto [e, qa] : qa_curve(QuantileSource::from(DistributionSpec::make(Family::gaussian, 1, 1)), 1))
           m = std::max(m, std::fabs(qa));
         return m <= 1e-9;
       }},
      {"weibull a=2 nu=2 holds", [&] { return holds(Family::weibull, 2, 2, 1); }},
      {"weibull a=6 nu=1 violated", [&] { return !holds(Family::weibull, 6, 1, 1); }},
      {"gamma a=150 nu=1 violated", [&] { return !holds(Family::gamma, 150, 1, 1); }},
      {"lognormal nu=3 holds", [&] { return holds(Family::lognormal, 1, 3, 1); }},
  };
  bool all = true;
  std::string detail;
  for (const auto& it : items) {
    bool ok = it.ok();
    all = all && ok;
    detail += fmt::format("{}{}: {}", detail.empty() ? "" : "; ", it.name, ok ? "ok" : "NOT MET");
  }
  return {all, detail};
}

Outcome c9_breakdown() {
  auto base = DistributionSpec::make(Family::gaussian, 1, 1);
  auto hl = run_breakdown_probe(parse_roster_entry("HL"), base, 10000, {0.25, 0.35}, 1e12, 9);
  auto tm = run_breakdown_probe(parse_roster_entry("STM"), base, 10000, {0.10, 0.15}, 1e12, 9);
  auto mean = run_breakdown_probe(parse_roster_entry("mean"), base, 10000, {0.0001, 0.001, 0.01, 0.1}, 1e12, 9);
  bool ok = !hl.rows[0].broken && hl.rows[1].broken && !tm.rows[0].broken && tm.rows[1].broken;
  for (const auto& r : mean.rows) ok = ok && r.broken;
  return {ok, fmt::format("HL: {:.4g} at 25%, {:.4g} at 35%; STM_1/8: {:.4g} at 10%, {:.4g} at 15%; mean broken at "
                          "all of 0.01%..10%: {}",
                          hl.rows[0].estimate, hl.rows[1].estimate, tm.rows[0].estimate, tm.rows[1].estimate,
                          std::all_of(mean.rows.begin(), mean.rows.end(), [](auto& r) { return r.broken; }))};
}

Outcome c10_variance() {
  auto v = run_variance_compare(DistributionSpec::make(Family::lognormal, 1, 1), 2, 1024, 1000, 10);
  return {v.var_mhlm < v.var_mom, fmt::format("Var(mHLM_k=2) = {:.4e}, Var(MoM_k=2) = {:.4e}, ratio {:.3f}",
                                               v.var_mhlm, v.var_mom, v.ratio)};
}

const std::vector<ResultRow>& desk_sweep() {
  static const std::vector<ResultRow> rows = [] {
    Config c;  // defaults: four skewed families, eps = 1/8 roster plus SM19 and WM19, n = 1e5 quasi
    return run_bias_sweep(sweep_config_from(c, false));
  }();
  return rows;
}

double bias_of(const std::vector<ResultRow>& rows, const std::string& fam, double kappa, const std::string& id) {
  for (const auto& r : rows)
    if (r.family == fam && r.kurtosis == r.kurtosis && std::fabs(r.kurtosis - kappa) < 1e-6 && r.estimator == id)
      return r.std_bias;
  return NAN;
}

std::vector<std::pair<std::string, double>> grid_points(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : rows)
    if (r.estimator == "STM") out.push_back({r.family, r.kurtosis});
  return out;
}

Outcome c11_similarity() {
  const auto& rows = desk_sweep();
  double worst = 0, sqm_bm3 = 0;
  int cells = 0;
  bool ok = true;
  for (auto [fam, kap] : grid_points(rows)) {
    double d = std::fabs(bias_of(rows, fam, kap, "SM19") - bias_of(rows, fam, kap, "WM19"));
    if (!(d < 0.01)) ok = false;
    worst = std::max(worst, d);
    sqm_bm3 = std::max(sqm_bm3, std::fabs(bias_of(rows, fam, kap, "SQM") - bias_of(rows, fam, kap, "BM3")));
    ++cells;
  }
  ok = ok && cells == 12;
  return {ok, fmt::format("{} (family, kurtosis) cells, max |bias(SM_1/9) - bias(WM_1/9)| = {:.4f}; "
                          "max |bias(SQM_1/8) - bias(BM3_1/8)| = {:.4f}",
                          cells, worst, sqm_bm3)};
}

Outcome c12_ranking() {
  const auto& rows = desk_sweep();
  auto roster = eighth_roster();
  bool ok = true;
  int cells = 0, wins = 0;
  std::ostringstream misses;
  double margin = INFINITY;
  for (auto [fam, kap] : grid_points(rows)) {
    double m = std::fabs(bias_of(rows, fam, kap, "mHLM"));
    std::string best = "mHLM";
    double second = INFINITY;
    for (const auto& e : roster) {
      if (e.id == "mHLM") continue;
      double b = std::fabs(bias_of(rows, fam, kap, e.id));
      second = std::min(second, b);
      if (b < m) best = e.id;
    }
    margin = std::min(margin, second - m);
    if (best != "mHLM" || !(m == m)) {
      ok = false;
      misses << ' ' << fam << '@' << kap << "->" << best;
    } else {
      ++wins;
    }
    ++cells;
  }
  ok = ok && cells == 12;
  return {ok, fmt::format("mHLM smallest |bias| in {}/12 cells{}; smallest margin to runner-up {:.4f}",
                          wins, misses.str(), margin)};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exponential H-L value", c1_exponential_hl},
      {"closed-form cross-check", c2_closed_form},
      {"bound monotonicity", c3_bound_monotonicity},
      {"concentration-bound monotone interval", c4_concentration},
      {"estimator identities", c5_identities},
      {"equivariance and symmetry", c6_equivariance_symmetry},
      {"inequality chain", c7_inequalities},
      {"orderliness verdicts", c8_orderliness},
      {"breakdown probes", c9_breakdown},
      {"variance comparison", c10_variance},
      {"bias similarity", c11_similarity},
      {"roster ranking", c12_ranking},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("criterion {:2d} {}: {} - {}", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
