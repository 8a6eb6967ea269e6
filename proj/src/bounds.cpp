#include "robloc/bounds.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "robloc/errors.hpp"

namespace robloc {
namespace {

constexpr double kE = 2.71828182845904523536;

void check_eps(double eps, double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter, fmt::format("gamma = {} must be >= 0", gamma));
  if (!(eps >= 0.0) || eps > 1.0 / (1.0 + gamma) * (1.0 + 1e-15))
    throw Error(ErrorKind::domain, fmt::format("epsilon = {} outside [0, 1/(1+gamma)]", eps));
}

double left_term(double eps, double gamma) {
  double g = 3.0 * gamma * eps;
  return std::sqrt(g / (4.0 - g));
}

}  // namespace

BoundValue sup_qa_general(double eps, double gamma) {
  check_eps(eps, gamma);
  if (eps == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double ge = gamma * eps;
  if (!(ge < 1.0)) throw Error(ErrorKind::domain, "gamma * epsilon must be < 1");
  return {0.5 * (std::sqrt(ge / (1.0 - ge)) + std::sqrt((1.0 - eps) / eps)), false};
}

double unimodal_branch1(double eps, double gamma) {
  return 0.5 * (std::sqrt(4.0 / (9.0 * eps) - 1.0) + left_term(eps, gamma));
}

double unimodal_branch2(double eps, double gamma) {
  const double r = 3.0 * (1.0 - eps);
  return 0.5 * (std::sqrt(r / (4.0 - r)) + left_term(eps, gamma));
}

BoundValue sup_qa_unimodal(double eps, double gamma) {
  check_eps(eps, gamma);
  if (gamma >= 5.0)
    throw Error(ErrorKind::parameter,
                fmt::format("unimodal bound for gamma = {} >= 5 is not implemented", gamma));
  if (eps == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {eps <= 1.0 / 6.0 ? unimodal_branch1(eps, gamma) : unimodal_branch2(eps, gamma), false};
}

double concentration_bound(const BoundQuery& q) {
  if (!(q.k >= 1.0)) throw Error(ErrorKind::parameter, "k must be >= 1");
  if (!(static_cast<double>(q.n) >= q.k)) throw Error(ErrorKind::parameter, "n must be >= k");
  if (!(q.gamma >= 0.0)) throw Error(ErrorKind::parameter, "gamma must be >= 0");
  const double d = 1.0 / (1.0 + q.gamma) - 1.0 / (q.k + q.t * q.t);
  return std::exp(-2.0 * static_cast<double>(q.n) / q.k * d * d);
}

std::pair<double, double> monotone_k_interval(double gamma, double t) {
  if (!(gamma >= 0.0)) throw Error(ErrorKind::parameter, "gamma must be >= 0");
  const double t2 = t * t;
  if (!(t2 < gamma + 1.0))
    throw Error(ErrorKind::domain, fmt::format("empty interval: t^2 = {} >= gamma + 1 = {}", t2, gamma + 1.0));
  const double lo = gamma - t2 + 1.0;
  const double disc = 9.0 * gamma * gamma + 18.0 * gamma - 8.0 * gamma * t2 - 8.0 * t2 + 9.0;
  const double hi = 0.5 * std::sqrt(disc) + 0.5 * (3.0 * gamma - 2.0 * t2 + 3.0);
  return {lo, hi};
}

double gamma_mom_bias_bound(double k, double gamma, double sigma) {
  if (!(k >= 1.0) || !(gamma >= 0.0) || !(sigma > 0.0))
    throw Error(ErrorKind::parameter, "need k >= 1, gamma >= 0, sigma > 0");
  return std::sqrt(gamma / k) * sigma;
}

double lambert_w_minus1(double x) {
  const double branch = -1.0 / kE;
  if (!(x < 0.0) || x < branch * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
    throw Error(ErrorKind::domain, fmt::format("x = {} outside [-1/e, 0)", x));
  const double q = 1.0 + kE * x;
  if (q <= 0.0) return -1.0;
  double w;
  const double p = -std::sqrt(2.0 * q);
  if (p > -0.6) {
    // branch-point series in p = -sqrt(2(1 + e x))
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p * p * p * p;
  } else {
    const double l1 = std::log(-x), l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int it = 0; it < 32; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::fabs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(w)) break;
  }
  return w;
}

double expected_hl_exponential(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::domain, fmt::format("lambda = {} must be > 0", lambda));
  return 0.5 * (-lambert_w_minus1(-0.5 / kE) - 1.0) * lambda;
}

}  // namespace robloc
