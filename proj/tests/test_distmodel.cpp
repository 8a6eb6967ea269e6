#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "robloc/distmodel.hpp"
#include "robloc/sobol.hpp"
#include "support.hpp"

using namespace robloc;

namespace {

std::vector<DistributionSpec> corpus() {
  return {DistributionSpec::make(Family::exponential, 1, 1),  DistributionSpec::make(Family::weibull, 0.8, 2),
          DistributionSpec::make(Family::weibull, 2, 1),      DistributionSpec::make(Family::weibull, 6, 1),
          DistributionSpec::make(Family::gamma, 0.5, 1),      DistributionSpec::make(Family::gamma, 3, 2),
          DistributionSpec::make(Family::lognormal, 0.5, 1),  DistributionSpec::make(Family::lognormal, 1, 1),
          DistributionSpec::make(Family::pareto, 5, 1),       DistributionSpec::make(Family::pareto, 8, 2),
          DistributionSpec::make(Family::gaussian, 1, 2, -1), DistributionSpec::make(Family::generalized_gaussian, 1, 1),
          DistributionSpec::make(Family::generalized_gaussian, 4, 1), DistributionSpec::make(Family::uniform, 1, 3, 1)};
}

double weibull_kurtosis(double a) {
  auto g = [a](double i) { return std::tgamma(1 + i / a); };
  double m2 = g(2) - g(1) * g(1);
  return (g(4) - 4 * g(3) * g(1) + 6 * g(2) * g(1) * g(1) - 3 * std::pow(g(1), 4)) / (m2 * m2);
}

}  // namespace

TEST(Quantile, Examples) {
  EXPECT_NEAR(quantile(DistributionSpec::make(Family::exponential, 1, 1), 0.5), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(quantile(DistributionSpec::make(Family::pareto, 2, 1), 0.75), 2.0);
  EXPECT_EQ(quantile(DistributionSpec::make(Family::gaussian, 1, 1), 0.5), 0.0);
}

TEST(Quantile, Errors) {
  auto e = DistributionSpec::make(Family::exponential, 1, 1);
  EXPECT_ERROR_KIND(quantile(e, -0.1), ErrorKind::domain);
  EXPECT_ERROR_KIND(quantile(e, 1.5), ErrorKind::domain);
  EXPECT_ERROR_KIND(quantile(e, 1.0), ErrorKind::infinite_endpoint);
  EXPECT_ERROR_KIND(quantile(DistributionSpec::make(Family::gaussian, 1, 1), 0.0), ErrorKind::infinite_endpoint);
  EXPECT_EQ(quantile(e, 0.0), 0.0);
  EXPECT_EQ(quantile(DistributionSpec::make(Family::uniform, 1, 1), 1.0), 1.0);
}

TEST(Quantile, MonotoneOnGrid) {
  for (const auto& d : corpus()) {
    double prev = -INFINITY;
    for (int i = 1; i < 1000; ++i) {
      double q = quantile(d, i / 1000.0);
      EXPECT_GE(q, prev) << to_string(d.family) << " p=" << i / 1000.0;
      prev = q;
    }
  }
}

TEST(Quantile, CdfRoundTrip) {
  for (const auto& d : corpus())
    for (int i = 1; i < 100; ++i) {
      double p = i / 100.0;
      EXPECT_NEAR(cdf(d, quantile(d, p)), p, 1e-9) << to_string(d.family) << " shape " << d.shape;
    }
}

TEST(Quantile, UpperTailMatches) {
  for (const auto& d : corpus())
    for (double q : {0.3, 0.1, 1e-3})
      EXPECT_NEAR(quantile_upper(d, q), quantile(d, 1 - q), 1e-9 * (1 + std::fabs(quantile(d, 1 - q))));
}

TEST(Density, Examples) {
  EXPECT_EQ(density(DistributionSpec::make(Family::exponential, 1, 1), 0.0), 1.0);
  auto g1 = DistributionSpec::make(Family::gamma, 1, 1);
  for (double t : {0.1, 1.0, 3.5}) EXPECT_NEAR(density(g1, t), std::exp(-t), 1e-14);
  EXPECT_EQ(density(DistributionSpec::make(Family::pareto, 2, 1), 0.5), 0.0);
}

TEST(Density, IntegratesToOne) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (const auto& d : corpus()) {
    auto [lo, hi] = support(d);
    // integrate over the quantile range that holds all but 2e-12 of the mass
    double a = std::isfinite(lo) ? lo : quantile(d, 1e-12);
    double b = std::isfinite(hi) ? hi : quantile_upper(d, 1e-12);
    double m = quantile(d, 0.5);
    auto f = [&](double x) { return density(d, x); };
    // tanh-sinh copes with the integrable singularity at 0 for shape < 1
    double s = ts.integrate(f, a, m) + ts.integrate(f, m, b);
    EXPECT_NEAR(s, 1.0, 1e-6) << to_string(d.family) << " shape " << d.shape;
  }
}

TEST(Moments, Examples) {
  auto e = moment_summary(DistributionSpec::make(Family::exponential, 1, 1));
  EXPECT_NEAR(e.mean, 1, 1e-14);
  EXPECT_NEAR(e.sd, 1, 1e-14);
  EXPECT_NEAR(e.skewness, 2, 1e-12);
  EXPECT_NEAR(e.kurtosis, 9, 1e-12);
  EXPECT_LT(std::fabs(moment_summary(DistributionSpec::make(Family::weibull, 3.602, 1)).skewness), 1e-3);
}

TEST(Moments, GammaSkewnessIsStandard) {
  // 2/sqrt(alpha); the numeric route is an independent check
  auto d = DistributionSpec::make(Family::gamma, 59, 1);
  auto m = moment_summary(d);
  EXPECT_NEAR(m.skewness, 2 / std::sqrt(59.0), 1e-12);
  EXPECT_NEAR(numeric_moment_summary(d).skewness, m.skewness, 1e-7);
}

TEST(Moments, NumericMatchesClosedForm) {
  for (const auto& d : corpus()) {
    auto c = moment_summary(d);
    auto q = numeric_moment_summary(d);
    std::string what = to_string(d.family) + " shape " + std::to_string(d.shape);
    EXPECT_NEAR(q.mean, c.mean, 1e-8 * c.sd) << what;
    EXPECT_NEAR(q.sd, c.sd, 1e-8 * c.sd) << what;
    EXPECT_NEAR(q.skewness, c.skewness, 1e-6) << what;
    EXPECT_NEAR(q.kurtosis, c.kurtosis, 1e-5 * c.kurtosis) << what;
    EXPECT_GE(c.kurtosis, 1 + c.skewness * c.skewness - 1e-12) << what;
  }
}

TEST(Moments, ParetoDivergence) {
  try {
    moment_summary(DistributionSpec::make(Family::pareto, 3.5, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::moment_divergence);
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_KIND(moment_summary(DistributionSpec::make(Family::pareto, 1, 1)), ErrorKind::moment_divergence);
}

TEST(Kurtosis, SolveExamples) {
  EXPECT_NEAR(solve_param_for_kurtosis(Family::gamma, 9).shape, 1.0, 1e-9);
  auto w = solve_param_for_kurtosis(Family::weibull, 9);
  EXPECT_NEAR(weibull_kurtosis(w.shape), 9.0, 1e-6);
  EXPECT_ERROR_KIND(solve_param_for_kurtosis(Family::pareto, 4), ErrorKind::range);
  // Pareto kurtosis falls toward 9 as alpha grows
  double a = 1e6;
  double pk = 6 * (a * a * a + a * a - 6 * a - 2) / (a * (a - 3) * (a - 4)) + 3;
  EXPECT_GT(pk, 9.0);
}

TEST(Kurtosis, SolveHitsTarget) {
  struct C {
    Family f;
    double k;
  };
  for (auto [f, k] : {C{Family::weibull, 3.5}, C{Family::weibull, 20}, C{Family::gamma, 4}, C{Family::gamma, 30},
                      C{Family::lognormal, 4}, C{Family::lognormal, 50}, C{Family::pareto, 12},
                      C{Family::pareto, 26}, C{Family::generalized_gaussian, 2.2},
                      C{Family::generalized_gaussian, 6}, C{Family::gaussian, 3}, C{Family::uniform, 1.8}}) {
    auto d = solve_param_for_kurtosis(f, k, 2.0);
    EXPECT_NEAR(moment_summary(d).kurtosis, k, 1e-6) << to_string(f);
    EXPECT_EQ(d.scale, 2.0);
  }
  EXPECT_ERROR_KIND(solve_param_for_kurtosis(Family::gaussian, 4), ErrorKind::range);
  EXPECT_ERROR_KIND(solve_param_for_kurtosis(Family::gamma, 2.5), ErrorKind::range);
}

TEST(Sobol, ReferenceDim1) {
  auto s = sobol_sequence(8, 1, 0);
  std::vector<double> want{0, .5, .75, .25, .375, .875, .625, .125};
  EXPECT_EQ(s, want);
  EXPECT_EQ(sobol_sequence(3, 1, 1), (std::vector<double>{.5, .75, .25}));
  EXPECT_EQ(sobol_sequence(1, 1, 0), (std::vector<double>{0.0}));
}

TEST(Sobol, ReferenceDim2) {
  auto s = sobol_sequence(4, 2, 0);
  std::vector<double> want{0, 0, .5, .5, .75, .25, .25, .75};
  EXPECT_EQ(s, want);
}

TEST(Sobol, RangeAndStreamAgree) {
  for (int dim : {1, 3, 17, 64}) {
    auto s = sobol_sequence(300, dim, 5);
    for (double x : s) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
    SobolStream st(dim, 5);
    std::vector<double> p(dim), q(dim);
    for (int i = 0; i < 300; ++i) {
      st.next(p.data());
      sobol_point(5 + i, dim, q.data());
      ASSERT_EQ(p, q);
      for (int j = 0; j < dim; ++j) ASSERT_EQ(p[j], s[i * dim + j]);
    }
  }
}

TEST(Sobol, Stratification) {
  // each dyadic interval of width 1/2^m holds one of the first 2^m points, every coordinate
  const int m = 10, n = 1 << m;
  for (int dim : {2, 40, 64}) {
    auto s = sobol_sequence(n, dim, 0);
    for (int j = 0; j < dim; ++j) {
      std::vector<int> hit(n, 0);
      for (int i = 0; i < n; ++i) ++hit[static_cast<int>(s[i * dim + j] * n)];
      for (int h : hit) ASSERT_EQ(h, 1) << "dim " << j;
    }
  }
}

TEST(Sobol, Errors) {
  EXPECT_ERROR_KIND(sobol_sequence(1, 65, 0), ErrorKind::unsupported_dimension);
  EXPECT_ERROR_KIND(sobol_sequence(1, 0, 0), ErrorKind::unsupported_dimension);
}

TEST(Sample, UniformQuasi) {
  auto s = draw_sample(DistributionSpec::make(Family::uniform, 1, 1), 3, SampleMode::quasi, 0, 1);
  EXPECT_EQ(s.values, (std::vector<double>{.25, .5, .75}));
  EXPECT_TRUE(s.sorted);
  EXPECT_EQ(s.provenance, Provenance::quasi);
}

TEST(Sample, Determinism) {
  for (auto mode : {SampleMode::quasi, SampleMode::pseudo}) {
    auto d = DistributionSpec::make(Family::lognormal, 1, 1);
    auto a = draw_sample(d, 5000, mode, 42);
    auto b = draw_sample(d, 5000, mode, 42);
    EXPECT_EQ(a.values, b.values);
    EXPECT_TRUE(std::is_sorted(a.values.begin(), a.values.end()));
  }
  auto d = DistributionSpec::make(Family::gaussian, 1, 1);
  EXPECT_NE(draw_sample(d, 100, SampleMode::pseudo, 1).values, draw_sample(d, 100, SampleMode::pseudo, 2).values);
}

TEST(Sample, QuasiMomentConvergence) {
  for (const auto& d : corpus()) {
    auto s = draw_sample(d, 1000000, SampleMode::quasi);
    double m = 0;
    for (double x : s.values) m += x;
    m /= s.values.size();
    auto ms = moment_summary(d);
    EXPECT_LE(std::fabs(m - ms.mean), 5e-3 * ms.sd) << to_string(d.family) << " shape " << d.shape;
  }
  auto s = draw_sample(DistributionSpec::make(Family::exponential, 1, 1), 1000000, SampleMode::quasi);
  double m = 0;
  for (double x : s.values) m += x;
  EXPECT_NEAR(m / 1e6, 1.0, 1e-3);
}

TEST(Spec, LocationAndAffine) {
  auto d = DistributionSpec::make(Family::exponential, 1, 2, 3);
  EXPECT_DOUBLE_EQ(quantile(d, 0.5), 3 + 2 * std::log(2.0));
  auto a = d.affine(0.5, -1);
  for (double p : {0.1, 0.5, 0.9}) EXPECT_NEAR(quantile(a, p), 0.5 * quantile(d, p) - 1, 1e-14);
  EXPECT_ERROR_KIND(DistributionSpec::make(Family::gamma, -1, 1), ErrorKind::parameter);
  EXPECT_ERROR_KIND(DistributionSpec::make(Family::gamma, 1, 0), ErrorKind::parameter);
}
