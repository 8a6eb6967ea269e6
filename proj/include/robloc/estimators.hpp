#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace robloc {

class SortedSample {
 public:
  SortedSample() = default;
  static SortedSample from_unsorted(std::vector<double> v);
  // Throws when v is not nondecreasing or holds non-finite values.
  static SortedSample from_sorted(std::vector<double> v);

  std::span<const double> values() const { return v_; }
  std::size_t size() const { return v_.size(); }
  // 1-based order statistic X_i
  double x(std::size_t i) const { return v_[i - 1]; }
  SortedSample affine(double lambda, double mu) const;

 private:
  explicit SortedSample(std::vector<double> v) : v_(std::move(v)) {}
  std::vector<double> v_;
};

struct TrimSpec {
  double epsilon = 0.0;
  double gamma = 1.0;
  int nu = 3;
  int strata = 3;
  void validate() const;
};

enum class QuantileConvention { ceiling, midpoint };
enum class QaDefinition { lower_scaled, upper_scaled };  // which tail gamma scales
enum class FractionalMode { weight, subsample };

// Weighted integral of the step function X(u) = X_ceil(u) over (lo, hi] in index units.
struct LPiece {
  double lo, hi, w;
};
// Point mass on the 1-based order statistic X_index.
struct LAtom {
  std::size_t index;
  double w;
};
struct LForm {
  std::vector<LPiece> pieces;
  std::vector<LAtom> atoms;
  double total_weight() const;
  bool integral_boundaries() const;
};

double apply(const LForm& f, std::span<const double> sorted);
// Per-order-statistic weights, rescaled so they sum to n.
std::vector<double> implicit_weights(const LForm& f, std::size_t n);

enum class EstimatorKind {
  mean,
  median,
  quantile,
  quantile_average,
  trimmed,
  winsorized,
  block_winsorized,
  stratified,
  binomial,
  stratified_quantile,
};

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::mean;
  TrimSpec trim;
  double p = 0.5;  // EstimatorKind::quantile only
  QuantileConvention conv = QuantileConvention::ceiling;
  QaDefinition defn = QaDefinition::lower_scaled;
  FractionalMode frac = FractionalMode::weight;
  int subsamples = 100;
  std::uint64_t seed = 0;
};

std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator_kind(const std::string& s);

LForm estimator_form(std::size_t n, const EstimatorSpec& e);
double estimate(const SortedSample& s, const EstimatorSpec& e);
// Asymptotic upper breakdown point.
double upper_breakdown(const EstimatorSpec& e);

// Side-space layout shared by SM and BM: pieces (a, b, w) on [0, 1/(1+gamma)].
struct SidePiece {
  double a, b, w;
};
std::vector<SidePiece> stratified_pattern(double eps, double gamma, int strata);
std::vector<SidePiece> binomial_pattern(double eps, double gamma, int nu);

double sample_mean(const SortedSample& s);
double median(const SortedSample& s);
double empirical_quantile(const SortedSample& s, double p,
                          QuantileConvention conv = QuantileConvention::ceiling);
double quantile_average(const SortedSample& s, const TrimSpec& t,
                        QaDefinition defn = QaDefinition::lower_scaled,
                        QuantileConvention conv = QuantileConvention::ceiling);
double trimmed_mean(const SortedSample& s, const TrimSpec& t);
double winsorized_mean(const SortedSample& s, const TrimSpec& t);
double block_winsorized_mean(const SortedSample& s, const TrimSpec& t);
double stratified_mean(const SortedSample& s, const TrimSpec& t);
double binomial_mean(const SortedSample& s, const TrimSpec& t);
double stratified_quantile_mean(const SortedSample& s, const TrimSpec& t,
                                QuantileConvention conv = QuantileConvention::ceiling);

// Nearest valid SQM epsilon, 1/(2(1+gamma)K).
double nearest_sqm_epsilon(double eps, double gamma);

}  // namespace robloc
