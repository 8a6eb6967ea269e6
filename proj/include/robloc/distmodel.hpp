#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robloc {

enum class Family {
  exponential,
  weibull,
  gamma,
  lognormal,
  pareto,
  gaussian,
  generalized_gaussian,
  uniform,
};

std::string to_string(Family f);
Family parse_family(const std::string& s);

// shape: alpha (weibull, gamma, pareto), beta (generalized_gaussian), sdlog (lognormal).
// scale: lambda, x_m for pareto, sd for gaussian, width for uniform.
// location shifts every family, one-sided ones included.
struct DistributionSpec {
  Family family = Family::exponential;
  double shape = 1.0;
  double scale = 1.0;
  double location = 0.0;

  static DistributionSpec make(Family f, double shape, double scale = 1.0, double location = 0.0);
  void validate() const;
  // lambda * X + mu
  DistributionSpec affine(double lambda, double mu) const;
};

struct MomentSummary {
  double mean;
  double sd;
  double skewness;
  double kurtosis;
};

enum class Provenance { quasi, pseudo, external };
enum class SampleMode { quasi, pseudo };

struct SampleVector {
  std::vector<double> values;
  bool sorted = false;
  Provenance provenance = Provenance::external;
  std::uint64_t seed = 0;
};

double quantile(const DistributionSpec& d, double p);
// Q(1 - q), accurate for small q.
double quantile_upper(const DistributionSpec& d, double q);
double density(const DistributionSpec& d, double x);
double cdf(const DistributionSpec& d, double x);
// Lower and upper support endpoints, possibly infinite.
std::pair<double, double> support(const DistributionSpec& d);

MomentSummary moment_summary(const DistributionSpec& d);
// Quadrature over the quantile function, tails split at p = 1/2.
MomentSummary numeric_moment_summary(const DistributionSpec& d, double rel_tol = 1e-10);

// Attainable open/closed kurtosis interval for the family's shape parameter.
std::pair<double, double> kurtosis_range(Family f);
DistributionSpec solve_param_for_kurtosis(Family f, double kappa, double scale = 1.0);

SampleVector draw_sample(const DistributionSpec& d, std::size_t n, SampleMode mode,
                         std::uint64_t seed = 0, std::uint64_t skip = 1);

}  // namespace robloc
