#include "robloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "robloc/errors.hpp"

namespace robloc {
namespace {

double snap(double x) {
  double r = std::round(x);
  return std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x)) ? r : x;
}

bool is_int(double x) { return x == std::floor(x); }

// Integral of X(u) = X_ceil(u) over (lo, hi], visiting each touched cell once.
template <class F>
void for_cells(std::size_t n, double lo, double hi, F&& f) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, static_cast<double>(n));
  if (!(hi > lo)) return;
  auto ia = static_cast<std::size_t>(std::floor(lo));
  auto ib = static_cast<std::size_t>(std::ceil(hi));
  if (ib == ia + 1) {
    f(ib, hi - lo);
    return;
  }
  f(ia + 1, static_cast<double>(ia + 1) - lo);
  for (std::size_t i = ia + 2; i < ib; ++i) f(i, 1.0);
  f(ib, hi - static_cast<double>(ib - 1));
}

void add_atom(LForm& f, std::size_t i, double w) {
  if (w != 0.0) f.atoms.push_back({i, w});
}

void add_piece(LForm& f, double lo, double hi, double w) {
  if (hi > lo && w != 0.0) f.pieces.push_back({lo, hi, w});
}

void quantile_atoms(LForm& f, std::size_t n, double p, QuantileConvention conv, double w) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, fmt::format("p = {} outside [0, 1]", p));
  const double dn = static_cast<double>(n);
  double np = snap(dn * p);
  if (np <= 0.0) {
    add_atom(f, 1, w);
    return;
  }
  if (conv == QuantileConvention::midpoint && is_int(np) && np < dn) {
    auto r = static_cast<std::size_t>(np);
    add_atom(f, r, 0.5 * w);
    add_atom(f, r + 1, 0.5 * w);
    return;
  }
  add_atom(f, std::min(n, static_cast<std::size_t>(std::ceil(np))), w);
}

void check_core(std::size_t n, const TrimSpec& t) {
  const double dn = static_cast<double>(n);
  double left = std::ceil(snap(dn * t.gamma * t.epsilon));
  double right = std::ceil(snap(dn * t.epsilon));
  if (!(left + right < dn))
    throw Error(ErrorKind::over_trim,
                fmt::format("trims {} + {} leave no core in n = {}", left, right, n));
}

// Groups of weights.size() blocks of width block_w tile [0, S]; breakdown-continuity
// refinement when the group count over [0, 1] is not integral.
std::vector<SidePiece> pattern(double S, double eps, double block_w,
                               const std::vector<double>& weights, double taken_w) {
  const double L = static_cast<double>(weights.size());
  const double G = L * block_w;
  const double J = snap(2.0 * S / G);
  std::vector<SidePiece> out;
  auto full = [&](int g) {
    for (std::size_t j = 0; j < weights.size(); ++j)
      if (weights[j] != 0.0)
        out.push_back({g * G + j * block_w, g * G + (j + 1) * block_w, weights[j]});
  };
  if (is_int(J)) {
    const int nj = static_cast<int>(J);
    for (int g = 0; g < nj / 2; ++g) full(g);
    if (nj % 2 == 1) {
      // middle group straddles the gamma-median, cut at S
      const double s0 = (nj / 2) * G;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        double a = s0 + j * block_w, b = std::min(S, a + block_w);
        if (b > a && weights[j] != 0.0) out.push_back({a, b, weights[j]});
      }
    }
    return out;
  }
  const int jf = static_cast<int>(std::floor(J));
  if (jf % 2 == 1 || jf == 0) {
    const int per = jf > 0 ? (jf - 1) / 2 : 0;
    for (int g = 0; g < per; ++g) full(g);
    out.push_back({per * G + eps, S, taken_w});
  } else {
    for (int g = 0; g < jf / 2; ++g) full(g);
    out.push_back({S - 0.5 * block_w, S, taken_w});
  }
  return out;
}

void side_to_index(LForm& f, std::size_t n, double gamma, const std::vector<SidePiece>& side) {
  const double dn = static_cast<double>(n);
  for (const auto& p : side) {
    if (gamma > 0.0) add_piece(f, snap(dn * gamma * p.a), snap(dn * gamma * p.b), p.w);
    add_piece(f, snap(dn - dn * p.b), snap(dn - dn * p.a), p.w);
  }
  if (!(f.total_weight() > 0.0))
    throw Error(ErrorKind::geometry, "block layout has no positive total weight");
}

std::size_t sqm_terms(double eps, double gamma) {
  if (!(eps > 0.0)) throw Error(ErrorKind::parameter, "SQM needs epsilon > 0");
  double k = 1.0 / (2.0 * (1.0 + gamma) * eps);
  double r = std::round(k);
  if (r < 1.0 || std::fabs(k - r) > 1e-9 * r)
    throw Error(ErrorKind::parameter,
                fmt::format("SQM term count {} is not integral; nearest valid epsilon is {}", k,
                            nearest_sqm_epsilon(eps, gamma)));
  return static_cast<std::size_t>(r);
}

}  // namespace

SortedSample SortedSample::from_unsorted(std::vector<double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorKind::domain, "sample holds a non-finite value");
  std::sort(v.begin(), v.end());
  return SortedSample(std::move(v));
}

SortedSample SortedSample::from_sorted(std::vector<double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw Error(ErrorKind::domain, "sample holds a non-finite value");
    if (i && v[i] < v[i - 1]) throw Error(ErrorKind::domain, "sample is not sorted");
  }
  return SortedSample(std::move(v));
}

SortedSample SortedSample::affine(double lambda, double mu) const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::parameter, "affine scale must be > 0");
  std::vector<double> v(v_.size());
  std::transform(v_.begin(), v_.end(), v.begin(), [&](double x) { return lambda * x + mu; });
  return SortedSample(std::move(v));
}

void TrimSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw Error(ErrorKind::parameter, fmt::format("gamma = {} must be >= 0", gamma));
  if (!(epsilon >= 0.0) || epsilon > 1.0 / (1.0 + gamma) + 1e-12)
    throw Error(ErrorKind::parameter,
                fmt::format("epsilon = {} outside [0, 1/(1+gamma)] for gamma = {}", epsilon, gamma));
  if (nu < 1) throw Error(ErrorKind::parameter, fmt::format("nu = {} must be >= 1", nu));
  if (strata < 3 || strata % 2 == 0)
    throw Error(ErrorKind::parameter, fmt::format("strata b = {} must be odd and >= 3", strata));
}

double LForm::total_weight() const {
  long double t = 0;
  for (const auto& p : pieces) t += static_cast<long double>(p.w) * (p.hi - p.lo);
  for (const auto& a : atoms) t += a.w;
  return static_cast<double>(t);
}

bool LForm::integral_boundaries() const {
  return std::all_of(pieces.begin(), pieces.end(),
                     [](const LPiece& p) { return is_int(p.lo) && is_int(p.hi); });
}

double apply(const LForm& f, std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::empty_input, "empty sample");
  const std::size_t n = x.size();
  long double num = 0, den = 0;
  for (const auto& p : f.pieces) {
    long double s = 0;
    for_cells(n, p.lo, p.hi, [&](std::size_t i, double c) {
      s += c == 1.0 ? static_cast<long double>(x[i - 1]) : static_cast<long double>(c) * x[i - 1];
    });
    num += p.w * s;
    den += static_cast<long double>(p.w) * (p.hi - p.lo);
  }
  for (const auto& a : f.atoms) {
    if (a.index < 1 || a.index > n) throw Error(ErrorKind::domain, "order statistic out of range");
    num += static_cast<long double>(a.w) * x[a.index - 1];
    den += a.w;
  }
  if (!(den > 0)) throw Error(ErrorKind::geometry, "estimator has no positive total weight");
  return static_cast<double>(num / den);
}

std::vector<double> implicit_weights(const LForm& f, std::size_t n) {
  std::vector<long double> w(n, 0.0L);
  for (const auto& p : f.pieces)
    for_cells(n, p.lo, p.hi, [&](std::size_t i, double c) { w[i - 1] += static_cast<long double>(p.w) * c; });
  for (const auto& a : f.atoms) w[a.index - 1] += a.w;
  long double t = 0;
  for (auto v : w) t += v;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(w[i] * n / t);
  return out;
}

std::vector<SidePiece> stratified_pattern(double eps, double gamma, int strata) {
  const double S = 1.0 / (1.0 + gamma);
  if (!(eps > 0.0) || !(eps < S))
    throw Error(ErrorKind::geometry, fmt::format("SM epsilon = {} leaves no stratum", eps));
  std::vector<double> w(strata, 0.0);
  w[(strata - 1) / 2] = 1.0;
  return pattern(S, eps, 2.0 * eps / (strata - 1), w, 1.0);
}

std::vector<SidePiece> binomial_pattern(double eps, double gamma, int nu) {
  const double S = 1.0 / (1.0 + gamma);
  if (!(eps > 0.0) || !(eps < S))
    throw Error(ErrorKind::geometry, fmt::format("BM epsilon = {} leaves no block", eps));
  std::vector<double> w(nu + 1);
  double c = 1.0;
  for (int j = 0; j <= nu; ++j) {
    w[j] = 1.0 - (j % 2 ? -c : c);
    c = c * (nu - j) / (j + 1);
  }
  return pattern(S, eps, eps, w, nu + 1.0);
}

double nearest_sqm_epsilon(double eps, double gamma) {
  double k = std::max(1.0, std::round(1.0 / (2.0 * (1.0 + gamma) * eps)));
  return 1.0 / (2.0 * (1.0 + gamma) * k);
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::mean: return "mean";
    case EstimatorKind::median: return "median";
    case EstimatorKind::quantile: return "quantile";
    case EstimatorKind::quantile_average: return "qa";
    case EstimatorKind::trimmed: return "tm";
    case EstimatorKind::winsorized: return "wm";
    case EstimatorKind::block_winsorized: return "bwm";
    case EstimatorKind::stratified: return "sm";
    case EstimatorKind::binomial: return "bm";
    case EstimatorKind::stratified_quantile: return "sqm";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(EstimatorKind::stratified_quantile); ++i) {
    auto k = static_cast<EstimatorKind>(i);
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::config, fmt::format("unknown estimator '{}'", s));
}

LForm estimator_form(std::size_t n, const EstimatorSpec& e) {
  if (n == 0) throw Error(ErrorKind::empty_input, "empty sample");
  const TrimSpec& t = e.trim;
  t.validate();
  const double dn = static_cast<double>(n);
  const double eps = t.epsilon, g = t.gamma;
  LForm f;
  switch (e.kind) {
    case EstimatorKind::mean: add_piece(f, 0.0, dn, 1.0); break;
    case EstimatorKind::median: quantile_atoms(f, n, 0.5, QuantileConvention::midpoint, 1.0); break;
    case EstimatorKind::quantile: quantile_atoms(f, n, e.p, e.conv, 1.0); break;
    case EstimatorKind::quantile_average:
      if (e.defn == QaDefinition::lower_scaled) {
        quantile_atoms(f, n, g * eps, e.conv, 0.5);
        quantile_atoms(f, n, 1.0 - eps, e.conv, 0.5);
      } else {
        quantile_atoms(f, n, eps, e.conv, 0.5);
        quantile_atoms(f, n, 1.0 - g * eps, e.conv, 0.5);
      }
      break;
    case EstimatorKind::trimmed:
      check_core(n, t);
      add_piece(f, snap(dn * g * eps), snap(dn - dn * eps), 1.0);
      break;
    case EstimatorKind::winsorized: {
      check_core(n, t);
      double a = snap(dn * g * eps), b = snap(dn - dn * eps);
      add_piece(f, a, b, 1.0);
      add_atom(f, static_cast<std::size_t>(std::floor(a)) + 1, a);
      add_atom(f, static_cast<std::size_t>(std::ceil(b)), dn - b);
      break;
    }
    case EstimatorKind::block_winsorized: {
      if (2.0 * eps + 2.0 * g * eps > 1.0 + 1e-12)
        throw Error(ErrorKind::geometry,
                    fmt::format("BWM blocks overlap: 2eps + 2gamma*eps = {} > 1", 2 * eps + 2 * g * eps));
      check_core(n, t);
      double a = snap(dn * g * eps), b = snap(dn - dn * eps);
      add_piece(f, a, b, 1.0);
      add_piece(f, a, snap(2.0 * dn * g * eps), 1.0);
      add_piece(f, snap(dn - 2.0 * dn * eps), b, 1.0);
      break;
    }
    case EstimatorKind::stratified: side_to_index(f, n, g, stratified_pattern(eps, g, t.strata)); break;
    case EstimatorKind::binomial: side_to_index(f, n, g, binomial_pattern(eps, g, t.nu)); break;
    case EstimatorKind::stratified_quantile: {
      const std::size_t K = sqm_terms(eps, g);
      const double wl = g / ((1.0 + g) * K), wr = 1.0 / ((1.0 + g) * K);
      for (std::size_t i = 1; i <= K; ++i) {
        const double o = (2.0 * i - 1.0) * eps;
        if (wl > 0.0) quantile_atoms(f, n, g * o, e.conv, wl);
        quantile_atoms(f, n, 1.0 - o, e.conv, wr);
      }
      break;
    }
  }
  return f;
}

double estimate(const SortedSample& s, const EstimatorSpec& e) {
  const std::size_t n = s.size();
  LForm f = estimator_form(n, e);
  if (e.frac == FractionalMode::weight || f.integral_boundaries()) return robloc::apply(f, s.values());

  // largest sub-size whose block boundaries are all integral
  std::size_t m = n - 1;
  LForm g;
  for (; m >= 1; --m) {
    try {
      g = estimator_form(m, e);
    } catch (const Error&) {
      continue;
    }
    if (g.integral_boundaries()) break;
  }
  if (m == 0) throw Error(ErrorKind::geometry, "no sub-sample size makes the boundaries integral");
  if (e.subsamples < 1) throw Error(ErrorKind::parameter, "subsample count must be >= 1");
  std::mt19937_64 gen(e.seed);
  std::vector<double> sub;
  sub.reserve(m);
  long double acc = 0;
  for (int r = 0; r < e.subsamples; ++r) {
    sub.clear();
    std::sample(s.values().begin(), s.values().end(), std::back_inserter(sub), m, gen);
    acc += robloc::apply(g, sub);
  }
  return static_cast<double>(acc / e.subsamples);
}

double upper_breakdown(const EstimatorSpec& e) {
  switch (e.kind) {
    case EstimatorKind::mean: return 0.0;
    case EstimatorKind::median: return 0.5;
    case EstimatorKind::quantile: return 1.0 - e.p;
    case EstimatorKind::quantile_average:
      return e.defn == QaDefinition::lower_scaled ? e.trim.epsilon : e.trim.gamma * e.trim.epsilon;
    default: return e.trim.epsilon;
  }
}

double sample_mean(const SortedSample& s) { return estimate(s, {EstimatorKind::mean}); }

double median(const SortedSample& s) { return estimate(s, {EstimatorKind::median}); }

double empirical_quantile(const SortedSample& s, double p, QuantileConvention conv) {
  EstimatorSpec e{EstimatorKind::quantile};
  e.p = p;
  e.conv = conv;
  return estimate(s, e);
}

double quantile_average(const SortedSample& s, const TrimSpec& t, QaDefinition defn,
                        QuantileConvention conv) {
  EstimatorSpec e{EstimatorKind::quantile_average, t};
  e.defn = defn;
  e.conv = conv;
  return estimate(s, e);
}

double trimmed_mean(const SortedSample& s, const TrimSpec& t) {
  return estimate(s, {EstimatorKind::trimmed, t});
}

double winsorized_mean(const SortedSample& s, const TrimSpec& t) {
  return estimate(s, {EstimatorKind::winsorized, t});
}

double block_winsorized_mean(const SortedSample& s, const TrimSpec& t) {
  return estimate(s, {EstimatorKind::block_winsorized, t});
}

double stratified_mean(const SortedSample& s, const TrimSpec& t) {
  return estimate(s, {EstimatorKind::stratified, t});
}

double binomial_mean(const SortedSample& s, const TrimSpec& t) {
  return estimate(s, {EstimatorKind::binomial, t});
}

double stratified_quantile_mean(const SortedSample& s, const TrimSpec& t, QuantileConvention conv) {
  EstimatorSpec e{EstimatorKind::stratified_quantile, t};
  e.conv = conv;
  return estimate(s, e);
}

}  // namespace robloc
