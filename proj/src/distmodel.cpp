#include "robloc/distmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "robloc/errors.hpp"
#include "robloc/sobol.hpp"

namespace robloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kPi = 3.14159265358979323846;

double norm_ppf(double p) { return -kSqrt2 * boost::math::erfc_inv(2.0 * p); }

bool unbounded_below(Family f) {
  return f == Family::gaussian || f == Family::generalized_gaussian;
}

bool unbounded_above(Family f) { return f != Family::uniform; }

double weibull_ratio(double a, int i) {
  // Gamma(1 + i/a) / Gamma(1 + 2/a)^(i/2)
  return std::exp(std::lgamma(1.0 + i / a) - 0.5 * i * std::lgamma(1.0 + 2.0 / a));
}

double weibull_kurtosis(double a) {
  double r1 = weibull_ratio(a, 1), r3 = weibull_ratio(a, 3), r4 = weibull_ratio(a, 4);
  double v = 1.0 - r1 * r1;
  return (r4 - 4.0 * r1 * r3 + 6.0 * r1 * r1 - 3.0 * r1 * r1 * r1 * r1) / (v * v);
}

double weibull_skewness(double a) {
  double r1 = weibull_ratio(a, 1), r3 = weibull_ratio(a, 3);
  double v = 1.0 - r1 * r1;
  return (r3 - 3.0 * r1 + 2.0 * r1 * r1 * r1) / std::pow(v, 1.5);
}

double lognormal_kurtosis(double s) {
  double w = std::exp(s * s);
  return w * w * w * w + 2.0 * w * w * w + 3.0 * w * w - 3.0;
}

double pareto_kurtosis(double a) {
  return 3.0 + 6.0 * (a * a * a + a * a - 6.0 * a - 2.0) / (a * (a - 3.0) * (a - 4.0));
}

double gg_kurtosis(double b) {
  return std::exp(std::lgamma(5.0 / b) + std::lgamma(1.0 / b) - 2.0 * std::lgamma(3.0 / b));
}

// Shape at which the Weibull kurtosis is smallest; left of it the family is right-skewed.
double weibull_kurtosis_argmin() {
  static const double a = [] {
    auto r = boost::math::tools::brent_find_minima(weibull_kurtosis, 2.0, 5.0, 52);
    return r.first;
  }();
  return a;
}

constexpr double kWeibullShapeLo = 0.1;
constexpr double kGgShapeLo = 0.05;
constexpr double kParetoShapeHi = 1e9;

template <class F>
double solve(F f, double lo, double hi) {
  std::uintmax_t it = 200;
  boost::math::tools::eps_tolerance<double> tol(50);
  auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, it);
  return 0.5 * (r.first + r.second);
}

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, fmt::format("p = {} outside [0, 1]", p));
}

// First divergent moment order (0 when all four are finite).
int divergent_order(const DistributionSpec& d) {
  if (d.family != Family::pareto) return 0;
  for (int r = 1; r <= 4; ++r)
    if (d.shape <= r) return r;
  return 0;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
    case Family::gamma: return "gamma";
    case Family::lognormal: return "lognormal";
    case Family::pareto: return "pareto";
    case Family::gaussian: return "gaussian";
    case Family::generalized_gaussian: return "generalized_gaussian";
    case Family::uniform: return "uniform";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  for (Family f : {Family::exponential, Family::weibull, Family::gamma, Family::lognormal,
                   Family::pareto, Family::gaussian, Family::generalized_gaussian, Family::uniform})
    if (to_string(f) == s) return f;
  if (s == "normal") return Family::gaussian;
  if (s == "gengauss") return Family::generalized_gaussian;
  throw Error(ErrorKind::config, fmt::format("unknown family '{}'", s));
}

DistributionSpec DistributionSpec::make(Family f, double shape, double scale, double location) {
  DistributionSpec d{f, shape, scale, location};
  d.validate();
  return d;
}

void DistributionSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorKind::parameter, fmt::format("scale must be > 0, got {}", scale));
  if (!std::isfinite(location)) throw Error(ErrorKind::parameter, "location must be finite");
  switch (family) {
    case Family::weibull:
    case Family::gamma:
    case Family::lognormal:
    case Family::pareto:
    case Family::generalized_gaussian:
      if (!(shape > 0.0) || !std::isfinite(shape))
        throw Error(ErrorKind::parameter,
                    fmt::format("{} shape must be > 0, got {}", to_string(family), shape));
      break;
    default: break;
  }
}

DistributionSpec DistributionSpec::affine(double lambda, double mu) const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::parameter, "affine scale must be > 0");
  return make(family, shape, scale * lambda, location * lambda + mu);
}

std::pair<double, double> support(const DistributionSpec& d) {
  double lo = d.location, hi = kInf;
  switch (d.family) {
    case Family::pareto: lo = d.location + d.scale; break;
    case Family::gaussian:
    case Family::generalized_gaussian: lo = -kInf; break;
    case Family::uniform: hi = d.location + d.scale; break;
    default: break;
  }
  return {lo, hi};
}

double quantile(const DistributionSpec& d, double p) {
  check_p(p);
  if (p == 0.0 && unbounded_below(d.family))
    throw Error(ErrorKind::infinite_endpoint, fmt::format("{} Q(0) = -inf", to_string(d.family)));
  if (p == 1.0 && unbounded_above(d.family))
    throw Error(ErrorKind::infinite_endpoint, fmt::format("{} Q(1) = +inf", to_string(d.family)));
  const double a = d.shape, l = d.scale, m = d.location;
  switch (d.family) {
    case Family::exponential: return m - l * std::log1p(-p);
    case Family::weibull: return m + l * std::pow(-std::log1p(-p), 1.0 / a);
    case Family::gamma: return p == 0.0 ? m : m + l * boost::math::gamma_p_inv(a, p);
    case Family::lognormal: return p == 0.0 ? m : m + l * std::exp(a * norm_ppf(p));
    case Family::pareto: return m + l * std::pow(1.0 - p, -1.0 / a);
    case Family::gaussian: return m + l * norm_ppf(p);
    case Family::generalized_gaussian:
      if (p < 0.5) return m - l * std::pow(boost::math::gamma_q_inv(1.0 / a, 2.0 * p), 1.0 / a);
      return m + l * std::pow(boost::math::gamma_q_inv(1.0 / a, 2.0 * (1.0 - p)), 1.0 / a);
    case Family::uniform: return m + l * p;
  }
  return 0.0;
}

double quantile_upper(const DistributionSpec& d, double q) {
  check_p(q);
  if (q >= 0.5) return quantile(d, 1.0 - q);
  if (q == 0.0) return quantile(d, 1.0);
  const double a = d.shape, l = d.scale, m = d.location;
  switch (d.family) {
    case Family::exponential: return m - l * std::log(q);
    case Family::weibull: return m + l * std::pow(-std::log(q), 1.0 / a);
    case Family::gamma: return m + l * boost::math::gamma_q_inv(a, q);
    case Family::lognormal: return m + l * std::exp(-a * norm_ppf(q));
    case Family::pareto: return m + l * std::pow(q, -1.0 / a);
    case Family::gaussian: return m - l * norm_ppf(q);
    case Family::generalized_gaussian:
      return m + l * std::pow(boost::math::gamma_q_inv(1.0 / a, 2.0 * q), 1.0 / a);
    case Family::uniform: return m + l * (1.0 - q);
  }
  return 0.0;
}

double density(const DistributionSpec& d, double x) {
  const double a = d.shape, l = d.scale;
  const double z = (x - d.location) / l;
  switch (d.family) {
    case Family::exponential: return z < 0.0 ? 0.0 : std::exp(-z) / l;
    case Family::weibull:
      if (z < 0.0) return 0.0;
      if (z == 0.0) return a < 1.0 ? kInf : (a == 1.0 ? 1.0 / l : 0.0);
      return a / l * std::pow(z, a - 1.0) * std::exp(-std::pow(z, a));
    case Family::gamma:
      if (z < 0.0) return 0.0;
      if (z == 0.0) return a < 1.0 ? kInf : (a == 1.0 ? 1.0 / l : 0.0);
      return boost::math::gamma_p_derivative(a, z) / l;
    case Family::lognormal: {
      if (z <= 0.0) return 0.0;
      double t = std::log(z) / a;
      return std::exp(-0.5 * t * t) / (z * a * std::sqrt(2.0 * kPi) * l);
    }
    case Family::pareto: return z < 1.0 ? 0.0 : a / l * std::pow(z, -a - 1.0);
    case Family::gaussian: return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * l);
    case Family::generalized_gaussian:
      return a / (2.0 * l * std::tgamma(1.0 / a)) * std::exp(-std::pow(std::fabs(z), a));
    case Family::uniform: return (z < 0.0 || z > 1.0) ? 0.0 : 1.0 / l;
  }
  return 0.0;
}

double cdf(const DistributionSpec& d, double x) {
  const double a = d.shape;
  const double z = (x - d.location) / d.scale;
  switch (d.family) {
    case Family::exponential: return z <= 0.0 ? 0.0 : -std::expm1(-z);
    case Family::weibull: return z <= 0.0 ? 0.0 : -std::expm1(-std::pow(z, a));
    case Family::gamma: return z <= 0.0 ? 0.0 : boost::math::gamma_p(a, z);
    case Family::lognormal:
      return z <= 0.0 ? 0.0 : 0.5 * std::erfc(-std::log(z) / (a * kSqrt2));
    case Family::pareto: return z <= 1.0 ? 0.0 : -std::expm1(-a * std::log(z));
    case Family::gaussian: return 0.5 * std::erfc(-z / kSqrt2);
    case Family::generalized_gaussian: {
      double g = 0.5 * boost::math::gamma_p(1.0 / a, std::pow(std::fabs(z), a));
      return z < 0.0 ? 0.5 - g : 0.5 + g;
    }
    case Family::uniform: return std::clamp(z, 0.0, 1.0);
  }
  return 0.0;
}

MomentSummary moment_summary(const DistributionSpec& d) {
  d.validate();
  if (int r = divergent_order(d))
    throw Error(ErrorKind::moment_divergence,
                fmt::format("pareto alpha = {}: moment of order {} is infinite", d.shape, r));
  const double a = d.shape, l = d.scale, m = d.location;
  switch (d.family) {
    case Family::exponential: return {m + l, l, 2.0, 9.0};
    case Family::weibull: {
      double g1 = std::tgamma(1.0 + 1.0 / a), g2 = std::tgamma(1.0 + 2.0 / a);
      return {m + l * g1, l * std::sqrt(g2 - g1 * g1), weibull_skewness(a), weibull_kurtosis(a)};
    }
    case Family::gamma: return {m + a * l, std::sqrt(a) * l, 2.0 / std::sqrt(a), 3.0 + 6.0 / a};
    case Family::lognormal: {
      double w = std::exp(a * a);
      return {m + l * std::exp(0.5 * a * a), l * std::sqrt((w - 1.0) * w),
              (w + 2.0) * std::sqrt(w - 1.0), lognormal_kurtosis(a)};
    }
    case Family::pareto:
      return {m + a * l / (a - 1.0), l / (a - 1.0) * std::sqrt(a / (a - 2.0)),
              2.0 * (1.0 + a) / (a - 3.0) * std::sqrt((a - 2.0) / a), pareto_kurtosis(a)};
    case Family::gaussian: return {m, l, 0.0, 3.0};
    case Family::generalized_gaussian:
      return {m, l * std::exp(0.5 * (std::lgamma(3.0 / a) - std::lgamma(1.0 / a))), 0.0,
              gg_kurtosis(a)};
    case Family::uniform: return {m + 0.5 * l, l / std::sqrt(12.0), 0.0, 1.8};
  }
  return {};
}

MomentSummary numeric_moment_summary(const DistributionSpec& d, double rel_tol) {
  d.validate();
  if (int r = divergent_order(d))
    throw Error(ErrorKind::moment_divergence, fmt::format("moment of order {} is infinite", r));
  boost::math::quadrature::tanh_sinh<double> ts;
  auto both = [&](auto g) {
    double lo = ts.integrate([&](double p) { return g(quantile(d, p)); }, 0.0, 0.5, rel_tol);
    double hi = ts.integrate([&](double q) { return g(quantile_upper(d, q)); }, 0.0, 0.5, rel_tol);
    return lo + hi;
  };
  double mu = both([](double x) { return x; });
  double m2 = both([&](double x) { return (x - mu) * (x - mu); });
  double m3 = both([&](double x) { return (x - mu) * (x - mu) * (x - mu); });
  double m4 = both([&](double x) {
    double t = (x - mu) * (x - mu);
    return t * t;
  });
  double sd = std::sqrt(m2);
  return {mu, sd, m3 / (m2 * sd), m4 / (m2 * m2)};
}

std::pair<double, double> kurtosis_range(Family f) {
  switch (f) {
    case Family::exponential: return {9.0, 9.0};
    case Family::weibull:
      return {weibull_kurtosis(weibull_kurtosis_argmin()), weibull_kurtosis(kWeibullShapeLo)};
    case Family::gamma: return {3.0, kInf};
    case Family::lognormal: return {3.0, kInf};
    case Family::pareto: return {pareto_kurtosis(kParetoShapeHi), kInf};
    case Family::gaussian: return {3.0, 3.0};
    case Family::generalized_gaussian: return {1.8, gg_kurtosis(kGgShapeLo)};
    case Family::uniform: return {1.8, 1.8};
  }
  return {0.0, 0.0};
}

DistributionSpec solve_param_for_kurtosis(Family f, double kappa, double scale) {
  auto [lo, hi] = kurtosis_range(f);
  auto unattainable = [&] {
    return Error(ErrorKind::range, fmt::format("kurtosis {} outside attainable range [{}, {}] for {}",
                                               kappa, lo, hi, to_string(f)));
  };
  if (!std::isfinite(kappa)) throw unattainable();
  if (lo == hi) {
    if (std::fabs(kappa - lo) > 1e-9) throw unattainable();
    return DistributionSpec::make(f, 1.0, scale);
  }
  if (!(kappa > lo && kappa < hi)) throw unattainable();
  double shape = 0.0;
  switch (f) {
    case Family::gamma: shape = 6.0 / (kappa - 3.0); break;
    case Family::weibull:
      shape = solve([&](double a) { return weibull_kurtosis(a) - kappa; }, kWeibullShapeLo,
                    weibull_kurtosis_argmin());
      break;
    case Family::lognormal: {
      auto g = [&](double w) { return w * w * w * w + 2.0 * w * w * w + 3.0 * w * w - 3.0 - kappa; };
      double whi = 2.0;
      while (g(whi) < 0.0) whi *= 2.0;
      shape = std::sqrt(std::log(solve(g, 1.0, whi)));
      break;
    }
    case Family::pareto:
      shape = solve([&](double a) { return pareto_kurtosis(a) - kappa; },
                    4.0 * (1.0 + 1e-12), kParetoShapeHi);
      break;
    case Family::generalized_gaussian: {
      double bhi = 2.0;
      while (gg_kurtosis(bhi) > kappa) bhi *= 2.0;
      shape = solve([&](double b) { return gg_kurtosis(b) - kappa; }, kGgShapeLo, bhi);
      break;
    }
    default: throw unattainable();
  }
  return DistributionSpec::make(f, shape, scale);
}

SampleVector draw_sample(const DistributionSpec& d, std::size_t n, SampleMode mode,
                         std::uint64_t seed, std::uint64_t skip) {
  d.validate();
  if (n == 0) throw Error(ErrorKind::empty_input, "sample size must be >= 1");
  SampleVector out;
  out.seed = seed;
  std::vector<double> u(n);
  if (mode == SampleMode::quasi) {
    out.provenance = Provenance::quasi;
    SobolStream s(1, skip);
    for (auto& x : u) s.next(&x);
  } else {
    out.provenance = Provenance::pseudo;
    std::mt19937_64 gen(seed);
    for (auto& x : u) x = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
  }
  out.values.resize(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out.values[i] = quantile(d, u[i]);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  std::sort(out.values.begin(), out.values.end());
  out.sorted = true;
  return out;
}

}  // namespace robloc
