#include "robloc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "draw.hpp"
#include "robloc/errors.hpp"
#include "robloc/sobol.hpp"

namespace robloc {
namespace {

double snap_rational(double x) {
  for (int q = 1; q <= 1024; ++q) {
    double r = std::round(x * q) / q;
    if (std::fabs(x - r) <= 1e-9) return r;
  }
  return x;
}

bool integral_k(double k) { return k == std::floor(k); }

// x[idx] averaged (uniform) or weighted by the rank of each index within the draw.
struct KernelEval {
  const double* x;
  const std::vector<double>* w;
  double wsum;
  std::vector<std::size_t> sorted;

  double operator()(const std::vector<std::size_t>& idx) {
    if (!w) {
      double s = 0.0;
      for (std::size_t i : idx) s += x[i];
      return s / static_cast<double>(idx.size());
    }
    sorted.assign(idx.begin(), idx.end());
    std::sort(sorted.begin(), sorted.end());
    double s = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) s += (*w)[j] * x[sorted[j]];
    return s / wsum;
  }
};

KernelEval make_eval(const SortedSample& s, const KernelSpec& spec) {
  KernelEval e{s.values().data(), nullptr, 0.0, {}};
  if (!spec.uniform_weights()) {
    e.w = &spec.weights;
    e.wsum = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
  }
  return e;
}

std::vector<double> enumerate(const SortedSample& s, const KernelSpec& spec, std::size_t K) {
  const std::size_t n = s.size();
  const std::size_t first = n - K + 1;  // possible leading indices
  std::vector<std::size_t> offset(first + 1, 0);
  for (std::size_t i = 0; i < first; ++i)
    offset[i + 1] = offset[i] + static_cast<std::size_t>(binomial_count(n - 1 - i, K - 1));
  std::vector<double> out(offset[first]);
  const auto lead = static_cast<std::ptrdiff_t>(first);
#pragma omp parallel
  {
    KernelEval eval = make_eval(s, spec);
    std::vector<std::size_t> idx(K);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t i0 = 0; i0 < lead; ++i0) {
      const auto i = static_cast<std::size_t>(i0);
      std::size_t pos = offset[i];
      for (std::size_t j = 0; j < K; ++j) idx[j] = i + j;
      while (true) {
        out[pos++] = eval(idx);
        // next combination of positions 1..K-1 over (i, n)
        std::size_t j = K;
        while (j > 1 && idx[j - 1] == n - K + j - 1) --j;
        if (j <= 1) break;
        ++idx[j - 1];
        for (std::size_t m = j; m < K; ++m) idx[m] = idx[m - 1] + 1;
      }
    }
  }
  return out;
}

std::vector<double> bootstrap(const SortedSample& s, const KernelSpec& spec, const BootstrapPlan& plan) {
  const std::size_t n = s.size();
  const auto kf = static_cast<std::size_t>(std::floor(spec.k));
  const auto kc = static_cast<std::size_t>(std::ceil(spec.k));
  std::vector<double> out(plan.total);
  const auto chunks = static_cast<std::ptrdiff_t>((plan.total + detail::kChunk - 1) / detail::kChunk);
  if (spec.index == IndexStream::quasi && kc > static_cast<std::size_t>(sobol_max_dim()))
    throw Error(ErrorKind::unsupported_dimension,
                fmt::format("quasi index stream supports k <= {}", sobol_max_dim()));
  std::exception_ptr err;
#pragma omp parallel
  {
    KernelEval eval = make_eval(s, spec);
    detail::IndexDrawer drawer(n);
    std::vector<std::size_t> idx, taken;
    std::vector<double> u(kc);
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      try {
        const std::size_t lo = c * detail::kChunk;
        const std::size_t hi = std::min(plan.total, lo + detail::kChunk);
        std::mt19937_64 gen(detail::substream_seed(spec.seed, c));
        std::optional<SobolStream> qs;
        if (spec.index == IndexStream::quasi) qs.emplace(static_cast<int>(kc), lo + 1);
        for (std::size_t d = lo; d < hi; ++d) {
          const std::size_t size = d < plan.draws_floor ? kf : kc;
          if (qs) {
            qs->next(u.data());
            detail::quasi_indices(u.data(), size, n, taken, idx);
          } else {
            drawer.draw(size, gen, idx);
          }
          out[d] = eval(idx);
        }
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(k >= 1.0) || !std::isfinite(k)) throw Error(ErrorKind::parameter, fmt::format("k = {} must be >= 1", k));
  if (!weights.empty()) {
    if (weights.size() != static_cast<std::size_t>(std::ceil(k)))
      throw Error(ErrorKind::parameter,
                  fmt::format("{} weights given for k = {}, need ceil(k)", weights.size(), k));
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw Error(ErrorKind::parameter, "kernel weights must be >= 0");
      sum += w;
    }
    if (!(sum > 0.0)) throw Error(ErrorKind::parameter, "kernel weights are all zero");
    if (!uniform_weights() && !integral_k(k))
      throw Error(ErrorKind::parameter, "non-uniform kernel weights need an integral k");
  }
}

bool KernelSpec::uniform_weights() const {
  return std::all_of(weights.begin(), weights.end(),
                     [&](double w) { return w == weights.front(); });
}

double breakdown_mapping(double eps0, double k) {
  if (!(eps0 >= 0.0 && eps0 < 1.0))
    throw Error(ErrorKind::domain, fmt::format("eps0 = {} outside [0, 1)", eps0));
  if (!(k >= 1.0)) throw Error(ErrorKind::domain, fmt::format("k = {} must be >= 1", k));
  return -std::expm1(std::log1p(-eps0) / k);
}

double breakdown_inverse(double eps, double k) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw Error(ErrorKind::domain, fmt::format("eps = {} outside [0, 1)", eps));
  if (!(k >= 1.0)) throw Error(ErrorKind::domain, fmt::format("k = {} must be >= 1", k));
  return -std::expm1(std::log1p(-eps) * k);
}

BootstrapPlan quasi_bootstrap_plan(double k, std::size_t b) {
  if (!(k >= 1.0)) throw Error(ErrorKind::parameter, fmt::format("k = {} must be >= 1", k));
  if (b == 0) throw Error(ErrorKind::parameter, "bootstrap size must be >= 1");
  if (integral_k(k)) return {b, 0, b};
  // nearbyint rounds half to even under the default rounding mode
  auto f = static_cast<std::size_t>(std::nearbyint((1.0 - k + std::floor(k)) * static_cast<double>(b)));
  f = std::min(f, b);
  return {f, b - f, b};
}

double binomial_count(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  std::size_t r = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t j = 1; j <= r; ++j) {
    c = c * static_cast<double>(n - r + j) / static_cast<double>(j);
    if (c > 1e300) return std::numeric_limits<double>::infinity();
  }
  return std::round(c);
}

KernelPlan resolve_kernel(std::size_t n, const KernelSpec& spec) {
  spec.validate();
  if (n == 0) throw Error(ErrorKind::empty_input, "empty sample");
  if (spec.k > static_cast<double>(n))
    throw Error(ErrorKind::domain, fmt::format("k = {} exceeds n = {}", spec.k, n));
  const bool integral = integral_k(spec.k);
  const double count = integral ? binomial_count(n, static_cast<std::size_t>(spec.k))
                                 : std::numeric_limits<double>::infinity();
  KernelPlan p{false, integral ? static_cast<std::size_t>(spec.k) : 0, {0, 0, 0}};
  if (spec.mode == KernelMode::exact) {
    if (!integral) throw Error(ErrorKind::parameter, "exact enumeration needs an integral k");
    if (count > kEnumerationCap)
      throw Error(ErrorKind::capacity,
                  fmt::format("C({}, {}) = {:.3g} exceeds the enumeration cap {:.0g}; use bootstrap mode",
                              n, p.kk, count, kEnumerationCap));
    p.exact = true;
  } else if (spec.mode == KernelMode::automatic && count <= kEnumerationCap) {
    p.exact = true;
  }
  if (p.exact) {
    p.plan = {static_cast<std::size_t>(count), 0, static_cast<std::size_t>(count)};
    return p;
  }
  std::size_t budget = spec.budget;
  if (budget == 0) budget = static_cast<std::size_t>(std::min(kEnumerationCap, 100.0 * static_cast<double>(n)));
  p.plan = quasi_bootstrap_plan(spec.k, budget);
  return p;
}

std::vector<double> kernel_values(const SortedSample& s, const KernelSpec& spec) {
  KernelPlan p = resolve_kernel(s.size(), spec);
  return p.exact ? enumerate(s, spec, p.kk) : bootstrap(s, spec, p.plan);
}

KernelSequence kernel_sequence(const SortedSample& s, const KernelSpec& spec) {
  KernelPlan p = resolve_kernel(s.size(), spec);
  std::vector<double> v = p.exact ? enumerate(s, spec, p.kk) : bootstrap(s, spec, p.plan);
  std::sort(v.begin(), v.end());
  return {SortedSample::from_sorted(std::move(v)), s.size(), spec.k, p.exact};
}

EstimatorSpec inner_estimator(double k, EstimatorKind wa, const TrimSpec& t, QuantileConvention conv) {
  EstimatorSpec e{wa, t};
  e.conv = conv;
  if (wa == EstimatorKind::median || wa == EstimatorKind::mean) return e;
  e.trim.epsilon = snap_rational(breakdown_inverse(t.epsilon, k));
  return e;
}

double weighted_hl_mean_values(std::vector<double>& v, double k, EstimatorKind wa, const TrimSpec& t,
                               QuantileConvention conv) {
  EstimatorSpec inner = inner_estimator(k, wa, t, conv);
  LForm f = estimator_form(v.size(), inner);
  if (!f.pieces.empty()) {
    std::sort(v.begin(), v.end());
    return robloc::apply(f, v);
  }
  // order statistics only: selection instead of a full sort
  std::sort(f.atoms.begin(), f.atoms.end(), [](const LAtom& a, const LAtom& b) { return a.index < b.index; });
  long double num = 0, den = 0;
  auto from = v.begin();
  for (const auto& a : f.atoms) {
    auto it = v.begin() + static_cast<std::ptrdiff_t>(a.index - 1);
    if (it >= from) {
      std::nth_element(from, it, v.end());
      from = it + 1;
    }
    num += static_cast<long double>(a.w) * *it;
    den += a.w;
  }
  return static_cast<double>(num / den);
}

double weighted_hl_mean(const SortedSample& s, const KernelSpec& spec, EstimatorKind wa, const TrimSpec& t,
                        QuantileConvention conv) {
  std::vector<double> v = kernel_values(s, spec);
  return weighted_hl_mean_values(v, spec.k, wa, t, conv);
}

double gamma_median_of_means(std::span<const double> x, std::size_t k, double gamma,
                             std::optional<std::uint64_t> seed) {
  if (x.empty()) throw Error(ErrorKind::empty_input, "empty sample");
  if (k == 0) throw Error(ErrorKind::parameter, "block size k must be >= 1");
  if (k > x.size()) throw Error(ErrorKind::domain, fmt::format("k = {} exceeds n = {}", k, x.size()));
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter, "gamma must be >= 0");
  std::vector<double> v(x.begin(), x.end());
  if (seed) {
    std::mt19937_64 gen(*seed);
    std::shuffle(v.begin(), v.end(), gen);
  }
  const std::size_t b = v.size() / k;
  std::vector<double> means(b);
  for (std::size_t i = 0; i < b; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += v[i * k + j];
    means[i] = s / static_cast<double>(k);
  }
  return empirical_quantile(SortedSample::from_unsorted(std::move(means)), gamma / (1.0 + gamma),
                            QuantileConvention::midpoint);
}

double median_of_randomized_means(std::span<const double> x, std::size_t k, std::size_t b, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "empty sample");
  if (k == 0 || b == 0) throw Error(ErrorKind::parameter, "k and b must be >= 1");
  if (k > n) throw Error(ErrorKind::domain, fmt::format("k = {} exceeds n = {}", k, n));
  std::vector<double> means(b);
  const auto chunks = static_cast<std::ptrdiff_t>((b + detail::kChunk - 1) / detail::kChunk);
#pragma omp parallel
  {
    detail::IndexDrawer drawer(n);
    std::vector<std::size_t> idx;
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      std::mt19937_64 gen(detail::substream_seed(seed, c));
      const std::size_t lo = c * detail::kChunk, hi = std::min(b, lo + detail::kChunk);
      for (std::size_t d = lo; d < hi; ++d) {
        drawer.draw(k, gen, idx);
        double s = 0.0;
        for (std::size_t i : idx) s += x[i];
        means[d] = s / static_cast<double>(k);
      }
    }
  }
  return median(SortedSample::from_unsorted(std::move(means)));
}

}  // namespace robloc
