#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robloc/estimators.hpp"

namespace robloc {

enum class KernelMode { exact, bootstrap, automatic };
enum class IndexStream { pseudo, quasi };

inline constexpr double kEnumerationCap = 1e7;

struct KernelSpec {
  double k = 2.0;
  std::vector<double> weights;  // empty means all ones
  std::size_t budget = 0;       // 0: min(1e7, 100 n)
  std::uint64_t seed = 0;
  KernelMode mode = KernelMode::automatic;
  IndexStream index = IndexStream::pseudo;
  void validate() const;
  bool uniform_weights() const;
};

struct BootstrapPlan {
  std::size_t draws_floor;
  std::size_t draws_ceil;
  std::size_t total;
};

struct KernelSequence {
  SortedSample values;
  std::size_t source_n;
  double k_used;
  bool exhaustive;
};

// eps = 1 - (1 - eps0)^(1/k)
double breakdown_mapping(double eps0, double k);
// eps0 = 1 - (1 - eps)^k
double breakdown_inverse(double eps, double k);
BootstrapPlan quasi_bootstrap_plan(double k, std::size_t b);
// C(n, k) as a double, saturating at +inf.
double binomial_count(std::size_t n, std::size_t k);

struct KernelPlan {
  bool exact;
  std::size_t kk;  // subset size when exact
  BootstrapPlan plan;
};
KernelPlan resolve_kernel(std::size_t n, const KernelSpec& spec);

// Unsorted kernel evaluations; OpenMP over index ranges, deterministic for any thread count.
std::vector<double> kernel_values(const SortedSample& s, const KernelSpec& spec);
KernelSequence kernel_sequence(const SortedSample& s, const KernelSpec& spec);

namespace serial {
// Single-threaded reference producing the same multiset as robloc::kernel_values.
std::vector<double> kernel_values(const SortedSample& s, const KernelSpec& spec);
}  // namespace serial

// Inner estimator `wa` applied to the kernel sequence; t.epsilon is the overall
// breakdown point and is mapped to the inner one through breakdown_inverse.
double weighted_hl_mean(const SortedSample& s, const KernelSpec& spec, EstimatorKind wa,
                        const TrimSpec& t = {},
                        QuantileConvention conv = QuantileConvention::midpoint);
// Same, on precomputed unsorted kernel values (reordered in place).
double weighted_hl_mean_values(std::vector<double>& values, double k, EstimatorKind wa,
                               const TrimSpec& t = {},
                               QuantileConvention conv = QuantileConvention::midpoint);
// Inner estimator spec after the breakdown mapping.
EstimatorSpec inner_estimator(double k, EstimatorKind wa, const TrimSpec& t,
                              QuantileConvention conv);

// No seed keeps the given order as the partition.
double gamma_median_of_means(std::span<const double> x, std::size_t k, double gamma,
                             std::optional<std::uint64_t> seed = std::nullopt);
double median_of_randomized_means(std::span<const double> x, std::size_t k, std::size_t b,
                                  std::uint64_t seed);

}  // namespace robloc
