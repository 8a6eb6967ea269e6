#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robloc/distmodel.hpp"

namespace robloc {

// Q(p) and Q(1 - q); built from a distribution or a (p, Q(p)) table.
struct QuantileSource {
  std::function<double(double)> lower;
  std::function<double(double)> upper;
  std::optional<DistributionSpec> dist;

  static QuantileSource from(const DistributionSpec& d);
  // Two whitespace-separated columns per line, '#' comments; p strictly increasing.
  // Linear interpolation; p outside the table is a domain error.
  static QuantileSource from_table(const std::string& text);
};

struct GridSpec {
  std::size_t points = 4096;
  double eps_min = 1e-4;
  std::optional<double> eps_max;  // default 1/(1+gamma) - 1e-4
  std::optional<double> fd_step;  // default: grid spacing
  bool tail = true;               // extra log-spaced grid below eps_min
  std::size_t tail_points = 64;
  double tail_min = 1e-8;
};

struct Violation {
  double epsilon;  // grid coordinate (k for U-orderliness)
  int order;
  double residual;
};

struct OrderlinessReport {
  int nu = 1;
  double gamma = 1.0;
  bool holds = true;
  std::vector<Violation> violations;
  double worst_residual = 0.0;
  double max_abs_residual = 0.0;
  double tolerance = 0.0;
  std::size_t points_checked = 0;
  // U-orderliness only
  std::vector<double> k_values, estimates, standard_errors;
};

enum class InequalityTarget { tm, wm, bwm, sqm_vs_bm2 };
std::string to_string(InequalityTarget t);
InequalityTarget parse_inequality_target(const std::string& s);

double population_qa(const QuantileSource& q, double eps, double gamma);
std::vector<std::pair<double, double>> qa_curve(const QuantileSource& q, double gamma,
                                                const GridSpec& grid = {});

OrderlinessReport check_nu_gamma_orderliness(const QuantileSource& q, int nu, double gamma,
                                             const GridSpec& grid = {},
                                             std::optional<double> tol = std::nullopt);

OrderlinessReport check_weighted_inequality(const QuantileSource& q, InequalityTarget target,
                                            double gamma, const GridSpec& grid = {},
                                            std::optional<double> tol = std::nullopt);

OrderlinessReport check_u_orderliness(const DistributionSpec& d, double gamma,
                                      const std::vector<double>& k_list, std::size_t n,
                                      std::size_t budget, std::uint64_t seed);

// Population functionals by quadrature of Q, independent of the sample estimators.
namespace population {
double integral(const QuantileSource& q, double a, double b);
double tm(const QuantileSource& q, double eps, double gamma);
double wm(const QuantileSource& q, double eps, double gamma);
double bwm(const QuantileSource& q, double eps, double gamma);
double sqm(const QuantileSource& q, double eps, double gamma);
double bm2(const QuantileSource& q, double eps, double gamma);
}  // namespace population

// Density of (X1 + X2)/2 for a distribution on [0, inf).
double hl2_density(const DistributionSpec& d, double x);
double hl2_cdf(const DistributionSpec& d, double x);
double hl2_median(const DistributionSpec& d);

}  // namespace robloc
