#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robloc/config.hpp"
#include "robloc/distmodel.hpp"
#include "robloc/estimators.hpp"
#include "robloc/kernels.hpp"

namespace robloc {

// One roster estimator. For kernel entries `inner` is applied to the kernel
// sequence and trim.epsilon is the overall breakdown point.
struct RosterEntry {
  std::string id;
  EstimatorKind inner = EstimatorKind::mean;
  TrimSpec trim;
  QuantileConvention conv = QuantileConvention::ceiling;
  QaDefinition defn = QaDefinition::lower_scaled;
  bool kernel = false;
  double k = 1.0;
  std::size_t budget = 0;
  KernelMode mode = KernelMode::automatic;

  double breakdown() const;
};

// "tm eps=0.125 gamma=1", "hl wa=median k=2", or a named alias such as BM3 or mHLM.
RosterEntry parse_roster_entry(const std::string& text);
std::vector<RosterEntry> eighth_roster();
double evaluate(const RosterEntry& e, const SortedSample& s, std::uint64_t seed);

struct FamilyGrid {
  Family family;
  std::vector<double> kappas;  // solved for shape
  std::vector<double> shapes;  // used as given
  double scale = 1.0;
};

struct SweepConfig {
  std::vector<FamilyGrid> families;
  std::vector<RosterEntry> roster;
  std::size_t n = 100000;
  SampleMode mode = SampleMode::quasi;
  std::uint64_t seed = 1;
  std::size_t reps = 200;
  bool paper_scale = false;
  std::string output;
};

inline constexpr std::size_t kFullSweepN = 3686000;
inline constexpr std::size_t kFullSeN = 5184;
inline constexpr std::size_t kFullReps = 1000;

// Reads families, kappa[.family], shape[.family], scale, roster, estimator.<id>,
// n, mode, seed, reps, paper_scale, output. `se` selects SE-study defaults.
SweepConfig sweep_config_from(const Config& c, bool se);

struct ResultRow {
  std::string family;
  double shape;
  double kurtosis;
  std::string estimator;
  double epsilon;
  double gamma;
  double k;
  std::size_t n;
  double estimate;
  double std_bias;
  double se;
  std::uint64_t seed;
  std::string note;
};

std::vector<ResultRow> run_bias_sweep(const SweepConfig& cfg);
std::vector<ResultRow> run_se_study(const SweepConfig& cfg);
std::string results_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& meta);

struct VarianceComparison {
  std::vector<double> mhlm, mom;
  double var_mhlm, var_mom, ratio;
};
VarianceComparison run_variance_compare(const DistributionSpec& d, std::size_t k, std::size_t n,
                                        std::size_t reps, std::uint64_t seed,
                                        std::size_t budget = 0);
std::string variance_csv(const VarianceComparison& v, const std::vector<std::string>& meta);

struct BreakdownRow {
  double fraction;
  std::size_t replaced;
  double estimate;
  bool broken;
};
struct BreakdownProbe {
  std::vector<BreakdownRow> rows;
  std::optional<double> first_broken;
};
BreakdownProbe run_breakdown_probe(const RosterEntry& e, const DistributionSpec& base,
                                   std::size_t n, const std::vector<double>& fractions,
                                   double magnitude, std::uint64_t seed,
                                   double threshold = 1e6);
std::string breakdown_csv(const RosterEntry& e, const BreakdownProbe& p,
                          const std::vector<std::string>& meta);

// CSV cell helpers: shortest round-trip reals, RFC 4180 quoting.
std::string csv_real(double x);
std::string csv_field(const std::string& s);

}  // namespace robloc
