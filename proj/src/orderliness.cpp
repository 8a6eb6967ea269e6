#include "robloc/orderliness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "robloc/errors.hpp"
#include "robloc/kernels.hpp"

namespace robloc {
namespace {

constexpr double kQuadTol = 1e-10;

double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadTol);
}

double snap(double x) {
  double r = std::round(x);
  return std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x)) ? r : x;
}

std::vector<double> main_grid(const GridSpec& g, double gamma) {
  const double S = 1.0 / (1.0 + gamma);
  const double hi = g.eps_max.value_or(S - 1e-4);
  if (g.points < 8) throw Error(ErrorKind::resolution, fmt::format("grid needs >= 8 points, got {}", g.points));
  if (!(g.eps_min > 0.0 && g.eps_min < hi && hi <= S))
    throw Error(ErrorKind::parameter,
                fmt::format("grid [{}, {}] must satisfy 0 < eps_min < eps_max <= {}", g.eps_min, hi, S));
  std::vector<double> e(g.points);
  const double h = (hi - g.eps_min) / static_cast<double>(g.points - 1);
  for (std::size_t i = 0; i < g.points; ++i) e[i] = g.eps_min + h * static_cast<double>(i);
  e.back() = hi;
  return e;
}

std::vector<double> tail_grid(const GridSpec& g) {
  std::vector<double> e;
  if (!g.tail || !(g.tail_min < g.eps_min) || g.tail_points < 2) return e;
  const double l0 = std::log(g.tail_min), l1 = std::log(g.eps_min);
  for (std::size_t i = 0; i < g.tail_points; ++i)
    e.push_back(std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(g.tail_points - 1)));
  e.back() = g.eps_min;
  return e;
}

std::vector<double> eval_qa(const QuantileSource& q, const std::vector<double>& eps, double gamma) {
  std::vector<double> v(eps.size());
  const auto m = static_cast<std::ptrdiff_t>(eps.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    try {
      v[i] = population_qa(q, eps[i], gamma);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return v;
}

// (-1)^j j! hbar^j f[x_i .. x_{i+j}]; equals the signed forward difference on a uniform grid.
void scan_differences(const std::vector<double>& x, const std::vector<double>& f, int nu,
                      std::size_t stride, double tol, OrderlinessReport& r) {
  const std::size_t m = x.size();
  for (int j = 1; j <= nu; ++j) {
    const std::size_t width = static_cast<std::size_t>(j) * stride;
    if (width >= m) break;
    std::vector<double> xs(j + 1), d(j + 1);
    for (std::size_t i = 0; i + width < m; ++i) {
      for (int l = 0; l <= j; ++l) {
        xs[l] = x[i + l * stride];
        d[l] = f[i + l * stride];
      }
      for (int lev = 1; lev <= j; ++lev)
        for (int l = j; l >= lev; --l) d[l] = (d[l] - d[l - 1]) / (xs[l] - xs[l - lev]);
      const double hbar = (xs[j] - xs[0]) / j;
      double res = d[j] * std::tgamma(j + 1.0) * std::pow(hbar, j);
      if (j % 2) res = -res;
      ++r.points_checked;
      r.worst_residual = std::min(r.worst_residual, res);
      r.max_abs_residual = std::max(r.max_abs_residual, std::fabs(res));
      if (res < -tol) r.violations.push_back({0.5 * (xs[0] + xs[j]), j, res});
    }
  }
}

void check_mean_finite(const QuantileSource& q) {
  if (q.dist && q.dist->family == Family::pareto && q.dist->shape <= 1.0)
    throw Error(ErrorKind::moment_divergence,
                fmt::format("pareto alpha = {}: the mean is infinite", q.dist->shape));
}

double interp(const std::vector<double>& p, const std::vector<double>& v, double x) {
  if (!(x >= p.front() && x <= p.back()))
    throw Error(ErrorKind::domain, fmt::format("p = {} outside the table range [{}, {}]", x, p.front(), p.back()));
  auto it = std::upper_bound(p.begin(), p.end(), x);
  if (it == p.end()) return v.back();
  std::size_t i = static_cast<std::size_t>(it - p.begin());
  if (i == 0) return v.front();
  const double t = (x - p[i - 1]) / (p[i] - p[i - 1]);
  return v[i - 1] + t * (v[i] - v[i - 1]);
}

}  // namespace

QuantileSource QuantileSource::from(const DistributionSpec& d) {
  d.validate();
  return {[d](double p) { return quantile(d, p); }, [d](double q) { return quantile_upper(d, q); }, d};
}

QuantileSource QuantileSource::from_table(const std::string& text) {
  std::vector<double> p, v;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw Error(ErrorKind::config, fmt::format("quantile table line {}: need two columns", lineno));
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorKind::config, fmt::format("quantile table line {}: p outside [0, 1]", lineno));
    if (!p.empty() && !(a > p.back()))
      throw Error(ErrorKind::config, fmt::format("quantile table line {}: p not strictly increasing", lineno));
    if (!v.empty() && b < v.back())
      throw Error(ErrorKind::config, fmt::format("quantile table line {}: Q decreasing", lineno));
    p.push_back(a);
    v.push_back(b);
  }
  if (p.size() < 2) throw Error(ErrorKind::config, "quantile table needs at least two rows");
  return {[p, v](double x) { return interp(p, v, x); }, [p, v](double x) { return interp(p, v, 1.0 - x); },
          std::nullopt};
}

std::string to_string(InequalityTarget t) {
  switch (t) {
    case InequalityTarget::tm: return "tm";
    case InequalityTarget::wm: return "wm";
    case InequalityTarget::bwm: return "bwm";
    case InequalityTarget::sqm_vs_bm2: return "sqm_vs_bm2";
  }
  return "?";
}

InequalityTarget parse_inequality_target(const std::string& s) {
  for (auto t : {InequalityTarget::tm, InequalityTarget::wm, InequalityTarget::bwm, InequalityTarget::sqm_vs_bm2})
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::config, fmt::format("unknown inequality target '{}'", s));
}

double population_qa(const QuantileSource& q, double eps, double gamma) {
  return 0.5 * (q.lower(gamma * eps) + q.upper(eps));
}

std::vector<std::pair<double, double>> qa_curve(const QuantileSource& q, double gamma, const GridSpec& grid) {
  auto e = main_grid(grid, gamma);
  auto v = eval_qa(q, e, gamma);
  std::vector<std::pair<double, double>> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = {e[i], v[i]};
  return out;
}

OrderlinessReport check_nu_gamma_orderliness(const QuantileSource& q, int nu, double gamma, const GridSpec& grid,
                                             std::optional<double> tol) {
  if (nu < 1) throw Error(ErrorKind::parameter, "nu must be >= 1");
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter, "gamma must be >= 0");
  if (grid.points < 4 * static_cast<std::size_t>(nu))
    throw Error(ErrorKind::resolution,
                fmt::format("{} grid points are too coarse for order {} (need {})", grid.points, nu, 4 * nu));
  OrderlinessReport r;
  r.nu = nu;
  r.gamma = gamma;
  auto e = main_grid(grid, gamma);
  auto v = eval_qa(q, e, gamma);
  auto te = tail_grid(grid);
  auto tv = eval_qa(q, te, gamma);

  const double h = e[1] - e[0];
  std::size_t stride = 1;
  if (grid.fd_step) stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(*grid.fd_step / h)));

  if (tol) {
    r.tolerance = *tol;
  } else {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double emin = te.empty() ? e.front() : te.front();
    const double spread = std::max(std::fabs(q.lower(gamma * emin)), std::fabs(q.upper(emin)));
    r.tolerance = 1e-7 * (*hi - *lo) + 1e-12 * spread;
  }
  scan_differences(e, v, nu, stride, r.tolerance, r);
  if (!te.empty()) scan_differences(te, tv, nu, 1, r.tolerance, r);
  std::sort(r.violations.begin(), r.violations.end(),
            [](const Violation& a, const Violation& b) { return a.epsilon < b.epsilon || (a.epsilon == b.epsilon && a.order < b.order); });
  r.holds = r.violations.empty();
  return r;
}

namespace population {

double integral(const QuantileSource& q, double a, double b) {
  if (!(b > a)) return 0.0;
  double s = 0.0;
  if (a < 0.5) s += gk(q.lower, a, std::min(b, 0.5));
  if (b > 0.5) s += gk(q.upper, 1.0 - b, 1.0 - std::max(a, 0.5));
  return s;
}

double tm(const QuantileSource& q, double eps, double gamma) {
  const double a = gamma * eps, b = 1.0 - eps;
  if (!(b > a)) throw Error(ErrorKind::over_trim, "empty trimmed core");
  return integral(q, a, b) / (b - a);
}

double wm(const QuantileSource& q, double eps, double gamma) {
  const double a = gamma * eps;
  return integral(q, a, 1.0 - eps) + a * q.lower(a) + eps * q.upper(eps);
}

double bwm(const QuantileSource& q, double eps, double gamma) {
  if (2.0 * eps + 2.0 * gamma * eps > 1.0 + 1e-12) throw Error(ErrorKind::geometry, "BWM blocks overlap");
  const double a = gamma * eps;
  return integral(q, a, 1.0 - eps) + integral(q, a, 2.0 * a) + integral(q, 1.0 - 2.0 * eps, 1.0 - eps);
}

double sqm(const QuantileSource& q, double eps, double gamma) {
  const double kd = 1.0 / (2.0 * (1.0 + gamma) * eps);
  const long K = std::lround(kd);
  if (K < 1 || std::fabs(kd - K) > 1e-9 * kd) throw Error(ErrorKind::parameter, "SQM term count not integral");
  double s = 0.0;
  for (long i = 1; i <= K; ++i) {
    const double o = (2.0 * i - 1.0) * eps;
    s += (gamma * q.lower(gamma * o) + q.upper(o)) / (1.0 + gamma);
  }
  return s / static_cast<double>(K);
}

double bm2(const QuantileSource& q, double eps, double gamma) {
  // taken blocks [(3g+1)eps, (3g+2)eps] in side space [0, S]
  const double S = 1.0 / (1.0 + gamma);
  if (!(eps > 0.0 && eps < S)) throw Error(ErrorKind::geometry, "BM epsilon leaves no block");
  const double G = 3.0 * eps;
  const double J = snap(2.0 * S / G);
  std::vector<std::pair<double, double>> blocks;
  long per;
  if (J == std::floor(J)) {
    per = static_cast<long>(J) / 2;
    if (static_cast<long>(J) % 2 == 1 && per * G + eps < S) blocks.push_back({per * G + eps, std::min(S, per * G + 2.0 * eps)});
  } else {
    const long jf = static_cast<long>(std::floor(J));
    if (jf % 2 == 1 || jf == 0) {
      per = jf > 0 ? (jf - 1) / 2 : 0;
      blocks.push_back({per * G + eps, S});
    } else {
      per = jf / 2;
      blocks.push_back({S - 0.5 * eps, S});
    }
  }
  for (long g = 0; g < per; ++g) blocks.push_back({g * G + eps, g * G + 2.0 * eps});
  double num = 0.0, den = 0.0;
  for (auto [a, b] : blocks) {
    num += integral(q, gamma * a, gamma * b) + integral(q, 1.0 - b, 1.0 - a);
    den += (1.0 + gamma) * (b - a);
  }
  return num / den;
}

}  // namespace population

OrderlinessReport check_weighted_inequality(const QuantileSource& q, InequalityTarget target, double gamma,
                                            const GridSpec& grid, std::optional<double> tol) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::parameter, "inequality checks need 0 <= gamma <= 1");
  check_mean_finite(q);
  OrderlinessReport r;
  r.gamma = gamma;
  r.tolerance = tol.value_or(1e-9);
  std::vector<double> e;
  if (target == InequalityTarget::sqm_vs_bm2) {
    const long kmax = std::min(256L, static_cast<long>(1.0 / (2.0 * (1.0 + gamma) * grid.eps_min)));
    for (long K = kmax; K >= 1; --K) e.push_back(1.0 / (2.0 * (1.0 + gamma) * K));
  } else {
    e = main_grid(grid, gamma);
    if (target == InequalityTarget::bwm) {
      const double cap = 1.0 / (2.0 * (1.0 + gamma));
      e.erase(std::remove_if(e.begin(), e.end(), [&](double x) { return x > cap; }), e.end());
    }
  }
  const auto m = static_cast<std::ptrdiff_t>(e.size());
  // slack per point; TM kept for the monotonicity pass
  std::vector<double> slack(e.size()), tmv(e.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    try {
      const double x = e[i];
      switch (target) {
        case InequalityTarget::tm:
          tmv[i] = population::tm(q, x, gamma);
          slack[i] = population_qa(q, x, gamma) - tmv[i];
          break;
        case InequalityTarget::wm: slack[i] = population::wm(q, x, gamma) - population::tm(q, x, gamma); break;
        case InequalityTarget::bwm: slack[i] = population::wm(q, x, gamma) - population::bwm(q, x, gamma); break;
        case InequalityTarget::sqm_vs_bm2:
          slack[i] = population::sqm(q, x, gamma) - population::bm2(q, x, gamma);
          break;
      }
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  auto record = [&](double x, int order, double s) {
    ++r.points_checked;
    r.worst_residual = std::min(r.worst_residual, s);
    r.max_abs_residual = std::max(r.max_abs_residual, std::fabs(s));
    if (s < -r.tolerance) r.violations.push_back({x, order, s});
  };
  for (std::size_t i = 0; i < e.size(); ++i) record(e[i], 0, slack[i]);
  if (target == InequalityTarget::tm)
    for (std::size_t i = 0; i + 1 < e.size(); ++i) record(0.5 * (e[i] + e[i + 1]), 1, tmv[i] - tmv[i + 1]);
  r.holds = r.violations.empty();
  return r;
}

OrderlinessReport check_u_orderliness(const DistributionSpec& d, double gamma, const std::vector<double>& k_list,
                                      std::size_t n, std::size_t budget, std::uint64_t seed) {
  if (k_list.empty()) throw Error(ErrorKind::parameter, "k list is empty");
  if (!std::is_sorted(k_list.begin(), k_list.end())) throw Error(ErrorKind::parameter, "k list must ascend");
  if (budget < 1000) throw Error(ErrorKind::precision, fmt::format("budget {} < 1000 gives no usable SE", budget));
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter, "gamma must be >= 0");
  constexpr int kBatches = 10;
  OrderlinessReport r;
  r.gamma = gamma;
  SampleVector sv = draw_sample(d, n, SampleMode::quasi);
  SortedSample s = SortedSample::from_sorted(std::move(sv.values));
  const double p = gamma / (1.0 + gamma);
  for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
    const double k = k_list[ki];
    double est, se = 0.0;
    if (k == 1.0) {
      est = empirical_quantile(s, p, QuantileConvention::midpoint);
    } else {
      TrimSpec t{-std::expm1(std::log(p) / k), gamma};
      std::vector<double> b(kBatches);
      for (int bi = 0; bi < kBatches; ++bi) {
        KernelSpec ks;
        ks.k = k;
        ks.mode = KernelMode::bootstrap;
        ks.budget = budget / kBatches;
        ks.seed = seed ^ (0x9e3779b97f4a7c15ull * (ki * kBatches + bi + 1));
        auto v = kernel_values(s, ks);
        b[bi] = weighted_hl_mean_values(v, k, EstimatorKind::quantile_average, t);
      }
      double mean = 0.0;
      for (double x : b) mean += x;
      mean /= kBatches;
      double var = 0.0;
      for (double x : b) var += (x - mean) * (x - mean);
      var /= kBatches - 1;
      est = mean;
      se = std::sqrt(var / kBatches);
    }
    r.k_values.push_back(k);
    r.estimates.push_back(est);
    r.standard_errors.push_back(se);
  }
  const double dir = r.estimates.back() - r.estimates.front();
  for (std::size_t i = 0; i + 1 < r.estimates.size(); ++i) {
    const double band = 3.0 * std::hypot(r.standard_errors[i], r.standard_errors[i + 1]);
    const double step = r.estimates[i + 1] - r.estimates[i];
    const double against = dir > 0.0 ? -step : (dir < 0.0 ? step : -std::fabs(step));
    ++r.points_checked;
    r.tolerance = std::max(r.tolerance, band);
    r.worst_residual = std::min(r.worst_residual, -against);
    r.max_abs_residual = std::max(r.max_abs_residual, std::fabs(step));
    if (against > band) r.violations.push_back({r.k_values[i + 1], 1, -against});
  }
  r.holds = r.violations.empty();
  return r;
}

double hl2_density(const DistributionSpec& d, double x) {
  auto [lo, hi] = support(d);
  if (!(lo >= 0.0) || std::isfinite(hi))
    throw Error(ErrorKind::domain, fmt::format("{} is not supported on [0, inf)", to_string(d.family)));
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, "x must be >= 0");
  const double top = 2.0 * x - lo;
  if (!(top > lo)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double t) { return 2.0 * density(d, t) * density(d, 2.0 * x - t); }, lo, top, 1e-10);
}

double hl2_cdf(const DistributionSpec& d, double x) {
  auto [lo, hi] = support(d);
  if (!(lo >= 0.0) || std::isfinite(hi))
    throw Error(ErrorKind::domain, fmt::format("{} is not supported on [0, inf)", to_string(d.family)));
  const double top = 2.0 * x - lo;
  if (!(top > lo)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double t) { return density(d, t) * cdf(d, 2.0 * x - t); }, lo, top, 1e-12);
}

double hl2_median(const DistributionSpec& d) {
  const double a = quantile(d, 0.05), b = quantile(d, 0.95);
  std::uintmax_t it = 200;
  boost::math::tools::eps_tolerance<double> tol(50);
  auto r = boost::math::tools::toms748_solve([&](double x) { return hl2_cdf(d, x) - 0.5; }, a, b, tol, it);
  return 0.5 * (r.first + r.second);
}

}  // namespace robloc
