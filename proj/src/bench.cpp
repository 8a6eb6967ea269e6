#include "robloc/bench.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "draw.hpp"
#include "robloc/errors.hpp"
#include "robloc/kernels.hpp"

namespace robloc {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// k with breakdown 1/8 for an inner breakdown of 1/4 (midhinge) and 1/2 (median)
const double kSqhlmK = (2.0 * std::log(2.0) - std::log(3.0)) / (3.0 * std::log(2.0) - std::log(7.0));
const double kMhlmK = std::log(2.0) / (3.0 * std::log(2.0) - std::log(7.0));

double parse_value(const std::string& s, const std::string& what) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return parse_double(s, what);
  return parse_double(s.substr(0, slash), what) / parse_double(s.substr(slash + 1), what);
}

std::uint64_t kernel_seed(std::uint64_t base, const RosterEntry& e) {
  return detail::substream_seed(base, std::bit_cast<std::uint64_t>(e.k) ^ (e.budget * 0x9e3779b97f4a7c15ull));
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> m = {
      {"mean", "mean"},
      {"median", "median"},
      {"STM", "tm eps=1/8"},
      {"SWM", "wm eps=1/8"},
      {"BWM", "bwm eps=1/8"},
      {"BM2", "bm eps=1/8 nu=2"},
      {"BM3", "bm eps=1/8 nu=3"},
      {"SQM", "sqm eps=1/8"},
      {"SM19", "sm eps=1/9 b=3"},
      {"WM19", "wm eps=1/9"},
      {"THLM2", "hl wa=tm k=2 eps=1/8"},
      {"WiHLM2", "hl wa=wm k=2 eps=1/8"},
      {"SQHLM", fmt::format("hl wa=sqm k={} eps=1/8", kSqhlmK)},
      {"mHLM", fmt::format("hl wa=median k={}", kMhlmK)},
      {"THLM5", "hl wa=tm k=5 eps=1/8"},
      {"WiHLM5", "hl wa=wm k=5 eps=1/8"},
      {"HL", "hl wa=median k=2"},
  };
  return m;
}

std::vector<double> default_kappas(Family f) {
  switch (f) {
    case Family::pareto: return {12.0, 18.0, 26.0};
    case Family::weibull:
    case Family::gamma:
    case Family::lognormal: return {4.0, 6.0, 9.0};
    default: return {};
  }
}

std::vector<double> default_shapes(Family f) {
  if (f == Family::generalized_gaussian) return {1.0, 2.0, 4.0};
  if (default_kappas(f).empty()) return {1.0};
  return {};
}

struct Target {
  std::optional<DistributionSpec> spec;
  double kappa;
  std::string note;
};

std::vector<Target> targets(const FamilyGrid& g) {
  std::vector<Target> out;
  for (double kap : g.kappas) {
    try {
      out.push_back({solve_param_for_kurtosis(g.family, kap, g.scale), kap, ""});
    } catch (const Error& e) {
      out.push_back({std::nullopt, kap, e.what()});
    }
  }
  for (double sh : g.shapes) {
    try {
      auto d = DistributionSpec::make(g.family, sh, g.scale);
      out.push_back({d, kNaN, ""});
    } catch (const Error& e) {
      out.push_back({std::nullopt, kNaN, e.what()});
    }
  }
  return out;
}

ResultRow base_row(const FamilyGrid& g, const Target& t, const RosterEntry& e, std::size_t n, std::uint64_t seed) {
  ResultRow r{to_string(g.family), t.spec ? t.spec->shape : kNaN, t.kappa, e.id, e.breakdown(), e.trim.gamma,
              e.kernel ? e.k : 1.0, n, kNaN, kNaN, kNaN, seed, t.note};
  return r;
}

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

void write_meta(std::ostringstream& o, const std::vector<std::string>& meta) {
  for (const auto& m : meta) o << "# " << m << '\n';
}

}  // namespace

double RosterEntry::breakdown() const {
  if (!kernel) {
    EstimatorSpec e{inner, trim};
    e.defn = defn;
    return upper_breakdown(e);
  }
  if (inner == EstimatorKind::median) return breakdown_mapping(0.5, k);
  if (inner == EstimatorKind::mean) return 0.0;
  return trim.epsilon;
}

RosterEntry parse_roster_entry(const std::string& text) {
  std::string t = trim(text);
  auto it = aliases().find(t);
  RosterEntry e;
  std::string body = t;
  if (it != aliases().end()) body = it->second;
  std::istringstream in(body);
  std::string kind;
  in >> kind;
  if (kind.empty()) throw Error(ErrorKind::config, "empty estimator spec");
  e.id = t;
  if (kind == "hl") {
    e.kernel = true;
    e.inner = EstimatorKind::median;
    e.conv = QuantileConvention::midpoint;
    e.k = 2.0;
  } else {
    e.inner = parse_estimator_kind(kind);
  }
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, fmt::format("'{}': expected key=value", tok));
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "eps") e.trim.epsilon = parse_value(val, key);
    else if (key == "gamma") e.trim.gamma = parse_value(val, key);
    else if (key == "nu") e.trim.nu = static_cast<int>(parse_u64(val, key));
    else if (key == "b") e.trim.strata = static_cast<int>(parse_u64(val, key));
    else if (key == "k") e.k = parse_value(val, key);
    else if (key == "budget") e.budget = parse_u64(val, key);
    else if (key == "mode") {
      if (val == "exact") e.mode = KernelMode::exact;
      else if (val == "bootstrap") e.mode = KernelMode::bootstrap;
      else if (val == "auto") e.mode = KernelMode::automatic;
      else throw Error(ErrorKind::config, fmt::format("unknown kernel mode '{}'", val));
    }
    else if (key == "wa") e.inner = parse_estimator_kind(val);
    else if (key == "id") e.id = val;
    else if (key == "conv") {
      if (val == "ceiling") e.conv = QuantileConvention::ceiling;
      else if (val == "midpoint") e.conv = QuantileConvention::midpoint;
      else throw Error(ErrorKind::config, fmt::format("unknown convention '{}'", val));
    } else if (key == "defn") {
      if (val == "lower") e.defn = QaDefinition::lower_scaled;
      else if (val == "upper") e.defn = QaDefinition::upper_scaled;
      else throw Error(ErrorKind::config, fmt::format("unknown QA definition '{}'", val));
    } else {
      throw Error(ErrorKind::config, fmt::format("unknown estimator option '{}'", key));
    }
  }
  try {
    e.trim.validate();
    if (e.kernel) {
      KernelSpec ks;
      ks.k = e.k;
      ks.validate();
      inner_estimator(e.k, e.inner, e.trim, e.conv).trim.validate();
    }
  } catch (const Error& err) {
    throw Error(ErrorKind::config, fmt::format("estimator '{}': {}", t, err.what()));
  }
  return e;
}

std::vector<RosterEntry> eighth_roster() {
  std::vector<RosterEntry> r;
  for (const char* id : {"STM", "SWM", "BWM", "BM2", "BM3", "SQM", "THLM2", "WiHLM2", "SQHLM", "mHLM", "THLM5", "WiHLM5"})
    r.push_back(parse_roster_entry(id));
  for (const auto& e : r)
    if (std::fabs(e.breakdown() - 0.125) > 1e-9)
      throw Error(ErrorKind::config, fmt::format("roster entry {} has breakdown {} instead of 1/8", e.id, e.breakdown()));
  return r;
}

double evaluate(const RosterEntry& e, const SortedSample& s, std::uint64_t seed) {
  if (!e.kernel) {
    EstimatorSpec spec{e.inner, e.trim};
    spec.conv = e.conv;
    spec.defn = e.defn;
    return estimate(s, spec);
  }
  KernelSpec ks;
  ks.k = e.k;
  ks.budget = e.budget;
  ks.mode = e.mode;
  ks.seed = kernel_seed(seed, e);
  return weighted_hl_mean(s, ks, e.inner, e.trim, e.conv);
}

SweepConfig sweep_config_from(const Config& c, bool se) {
  SweepConfig cfg;
  cfg.paper_scale = c.get_bool("paper_scale", false);
  auto fams = c.has("families") ? c.get_list("families")
                                : (se ? std::vector<std::string>{"gaussian"}
                                      : std::vector<std::string>{"weibull", "gamma", "lognormal", "pareto"});
  for (const auto& name : fams) {
    FamilyGrid g{parse_family(name), {}, {}, c.get_double("scale", 1.0)};
    const std::string fk = "kappa." + name, sk = "shape." + name;
    if (c.has(fk)) g.kappas = c.get_doubles(fk);
    if (c.has(sk)) g.shapes = c.get_doubles(sk);
    if (!c.has(fk) && !c.has(sk)) {
      if (c.has("kappa") && !default_kappas(g.family).empty()) g.kappas = c.get_doubles("kappa");
      else if (c.has("shape")) g.shapes = c.get_doubles("shape");
      else {
        g.kappas = default_kappas(g.family);
        g.shapes = default_shapes(g.family);
      }
    }
    cfg.families.push_back(g);
  }
  auto names = c.has("roster") ? c.get_list("roster")
                               : (se ? std::vector<std::string>{"mean", "median", "HL"}
                                     : std::vector<std::string>{"eighth", "SM19", "WM19"});
  for (const auto& name : names) {
    if (name == "eighth") {
      auto f = eighth_roster();
      cfg.roster.insert(cfg.roster.end(), f.begin(), f.end());
    } else if (c.has("estimator." + name)) {
      RosterEntry e = parse_roster_entry(c.get("estimator." + name));
      e.id = name;
      cfg.roster.push_back(e);
    } else {
      cfg.roster.push_back(parse_roster_entry(name));
    }
  }
  cfg.n = c.get_size("n", se ? kFullSeN : (cfg.paper_scale ? kFullSweepN : 100000));
  cfg.reps = c.get_size("reps", cfg.paper_scale ? kFullReps : 200);
  std::string mode = c.get("mode", se ? "pseudo" : "quasi");
  if (mode == "quasi") cfg.mode = SampleMode::quasi;
  else if (mode == "pseudo") cfg.mode = SampleMode::pseudo;
  else throw Error(ErrorKind::config, fmt::format("mode must be quasi or pseudo, got '{}'", mode));
  cfg.seed = c.get_u64("seed", 1);
  cfg.output = c.get("output");
  if (cfg.n == 0) throw Error(ErrorKind::config, "n must be >= 1");
  if (se && cfg.reps < 2) throw Error(ErrorKind::config, "reps must be >= 2");
  if (cfg.roster.empty()) throw Error(ErrorKind::config, "empty roster");
  return cfg;
}

std::vector<ResultRow> run_bias_sweep(const SweepConfig& cfg) {
  std::vector<ResultRow> rows;
  for (const auto& g : cfg.families) {
    for (const auto& t : targets(g)) {
      std::optional<MomentSummary> ms;
      std::string note = t.note;
      if (t.spec) {
        try {
          ms = moment_summary(*t.spec);
        } catch (const Error& e) {
          note = e.what();
        }
      }
      if (!ms) {
        for (const auto& e : cfg.roster) {
          auto r = base_row(g, t, e, cfg.n, cfg.seed);
          r.note = note;
          rows.push_back(r);
        }
        continue;
      }
      SampleVector sv = draw_sample(*t.spec, cfg.n, cfg.mode, cfg.seed);
      SortedSample s = SortedSample::from_sorted(std::move(sv.values));
      // kernel evaluations shared between entries with the same (k, budget)
      std::map<std::tuple<double, std::size_t, KernelMode>, std::vector<double>> cache;
      for (const auto& e : cfg.roster) {
        auto r = base_row(g, t, e, cfg.n, cfg.seed);
        r.kurtosis = ms->kurtosis;
        try {
          if (e.kernel) {
            auto key = std::make_tuple(e.k, e.budget, e.mode);
            auto it = cache.find(key);
            if (it == cache.end()) {
              KernelSpec ks;
              ks.k = e.k;
              ks.budget = e.budget;
              ks.mode = e.mode;
              ks.seed = kernel_seed(cfg.seed, e);
              it = cache.emplace(key, kernel_values(s, ks)).first;
            }
            r.estimate = weighted_hl_mean_values(it->second, e.k, e.inner, e.trim, e.conv);
          } else {
            r.estimate = evaluate(e, s, cfg.seed);
          }
          r.std_bias = (r.estimate - ms->mean) / ms->sd;
        } catch (const Error& err) {
          r.note = err.what();
        }
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_se_study(const SweepConfig& cfg) {
  if (cfg.reps < 2) throw Error(ErrorKind::parameter, "SE study needs at least 2 replications");
  std::vector<ResultRow> rows;
  const std::size_t m = cfg.roster.size();
  for (const auto& g : cfg.families) {
    for (const auto& t : targets(g)) {
      std::optional<MomentSummary> ms;
      std::string note = t.note;
      if (t.spec) {
        try {
          ms = moment_summary(*t.spec);
        } catch (const Error& e) {
          note = e.what();
        }
      }
      if (!ms) {
        for (const auto& e : cfg.roster) {
          auto r = base_row(g, t, e, cfg.n, cfg.seed);
          r.note = note;
          rows.push_back(r);
        }
        continue;
      }
      std::vector<double> est(cfg.reps * m, kNaN);
      std::vector<std::string> errs(m);
      const auto reps = static_cast<std::ptrdiff_t>(cfg.reps);
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t rep = 0; rep < reps; ++rep) {
        const std::uint64_t rs = detail::substream_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        SampleVector sv = draw_sample(*t.spec, cfg.n, SampleMode::pseudo, rs);
        SortedSample s = SortedSample::from_sorted(std::move(sv.values));
        for (std::size_t j = 0; j < m; ++j) {
          try {
            est[rep * m + j] = evaluate(cfg.roster[j], s, rs);
          } catch (const Error& err) {
#pragma omp critical
            if (errs[j].empty()) errs[j] = err.what();
          }
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        auto r = base_row(g, t, cfg.roster[j], cfg.n, cfg.seed);
        r.kurtosis = ms->kurtosis;
        if (!errs[j].empty()) {
          r.note = errs[j];
        } else {
          std::vector<double> v(cfg.reps);
          for (std::size_t rep = 0; rep < cfg.reps; ++rep) v[rep] = est[rep * m + j];
          double mean = 0.0;
          for (double x : v) mean += x;
          mean /= static_cast<double>(v.size());
          r.estimate = mean;
          r.std_bias = (mean - ms->mean) / ms->sd;
          r.se = std::sqrt(sample_variance(v));
          r.note = fmt::format("reps={}", cfg.reps);
        }
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::string csv_real(double x) {
  if (std::isnan(x)) return "";
  return fmt::format("{}", x);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string results_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& meta) {
  std::ostringstream o;
  o << "# robloc results v1\n# std_bias = (estimate - mean) / sd with closed-form mean and sd\n";
  write_meta(o, meta);
  o << "family,shape,kurtosis,estimator,epsilon,gamma,k,n,estimate,std_bias,se,seed,note\n";
  for (const auto& r : rows) {
    o << csv_field(r.family) << ',' << csv_real(r.shape) << ',' << csv_real(r.kurtosis) << ','
      << csv_field(r.estimator) << ',' << csv_real(r.epsilon) << ',' << csv_real(r.gamma) << ','
      << csv_real(r.k) << ',' << r.n << ',' << csv_real(r.estimate) << ',' << csv_real(r.std_bias) << ','
      << csv_real(r.se) << ',' << r.seed << ',' << csv_field(r.note) << '\n';
  }
  return o.str();
}

VarianceComparison run_variance_compare(const DistributionSpec& d, std::size_t k, std::size_t n, std::size_t reps,
                                        std::uint64_t seed, std::size_t budget) {
  if (reps < 2) throw Error(ErrorKind::parameter, "need at least 2 replications");
  if (k == 0 || k > n) throw Error(ErrorKind::domain, fmt::format("k = {} outside [1, n = {}]", k, n));
  VarianceComparison v;
  v.mhlm.assign(reps, kNaN);
  v.mom.assign(reps, kNaN);
  const auto R = static_cast<std::ptrdiff_t>(reps);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < R; ++r) {
    try {
      const std::uint64_t rs = detail::substream_seed(seed, static_cast<std::uint64_t>(r));
      SampleVector sv = draw_sample(d, n, SampleMode::pseudo, rs);
      SortedSample s = SortedSample::from_sorted(sv.values);
      KernelSpec ks;
      ks.k = static_cast<double>(k);
      ks.budget = budget;
      ks.seed = detail::substream_seed(rs, 1);
      v.mhlm[r] = weighted_hl_mean(s, ks, EstimatorKind::median);
      v.mom[r] = gamma_median_of_means(sv.values, k, 1.0, detail::substream_seed(rs, 2));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  v.var_mhlm = sample_variance(v.mhlm);
  v.var_mom = sample_variance(v.mom);
  v.ratio = v.var_mhlm / v.var_mom;
  return v;
}

std::string variance_csv(const VarianceComparison& v, const std::vector<std::string>& meta) {
  std::ostringstream o;
  o << "# robloc variance-compare v1\n";
  write_meta(o, meta);
  o << "# var_mhlm = " << csv_real(v.var_mhlm) << "\n# var_mom = " << csv_real(v.var_mom)
    << "\n# ratio = " << csv_real(v.ratio) << '\n';
  o << "rep,mhlm,mom\n";
  for (std::size_t i = 0; i < v.mhlm.size(); ++i)
    o << i << ',' << csv_real(v.mhlm[i]) << ',' << csv_real(v.mom[i]) << '\n';
  return o.str();
}

BreakdownProbe run_breakdown_probe(const RosterEntry& e, const DistributionSpec& base, std::size_t n,
                                   const std::vector<double>& fractions, double magnitude, std::uint64_t seed,
                                   double threshold) {
  SampleVector sv = draw_sample(base, n, SampleMode::pseudo, seed);
  const double top = sv.values.back();
  if (!(magnitude > 1e3 * std::max(1.0, std::fabs(top))))
    throw Error(ErrorKind::parameter, "contamination magnitude must dominate the sample scale");
  BreakdownProbe p;
  for (double c : fractions) {
    if (!(c >= 0.0 && c <= 0.5)) throw Error(ErrorKind::parameter, fmt::format("fraction {} outside [0, 0.5]", c));
    const auto m = static_cast<std::size_t>(std::floor(c * static_cast<double>(n) + 1e-9));
    std::vector<double> v = sv.values;
    for (std::size_t i = n - m; i < n; ++i) v[i] = magnitude;
    double est = evaluate(e, SortedSample::from_sorted(std::move(v)), seed);
    bool broken = !(std::fabs(est) < threshold);
    p.rows.push_back({c, m, est, broken});
    if (broken && !p.first_broken) p.first_broken = c;
  }
  return p;
}

std::string breakdown_csv(const RosterEntry& e, const BreakdownProbe& p, const std::vector<std::string>& meta) {
  std::ostringstream o;
  o << "# robloc breakdown v1\n";
  write_meta(o, meta);
  o << "# first_broken = " << (p.first_broken ? csv_real(*p.first_broken) : std::string("none")) << '\n';
  o << "estimator,fraction,replaced,estimate,broken\n";
  for (const auto& r : p.rows)
    o << csv_field(e.id) << ',' << csv_real(r.fraction) << ',' << r.replaced << ',' << csv_real(r.estimate) << ','
      << (r.broken ? 1 : 0) << '\n';
  return o.str();
}

}  // namespace robloc
