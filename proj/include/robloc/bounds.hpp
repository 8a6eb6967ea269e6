#pragma once

#include <cstddef>
#include <utility>

namespace robloc {

// Bias bounds are in sigma units for a standardized distribution (mu = 0, sigma = 1).
struct BoundValue {
  double value;
  bool infinite;
};

struct BoundQuery {
  double epsilon = 0.0;
  double gamma = 1.0;
  double k = 1.0;
  double t = 0.0;
  std::size_t n = 1;
  double sigma = 1.0;
};

BoundValue sup_qa_general(double epsilon, double gamma);
BoundValue sup_qa_unimodal(double epsilon, double gamma);
// The two pieces of the unimodal bound, evaluated without branch selection.
double unimodal_branch1(double epsilon, double gamma);
double unimodal_branch2(double epsilon, double gamma);

// exp(-(2n/k) (1/(1+gamma) - 1/(k+t^2))^2)
double concentration_bound(const BoundQuery& q);
std::pair<double, double> monotone_k_interval(double gamma, double t);
double gamma_mom_bias_bound(double k, double gamma, double sigma);

double lambert_w_minus1(double x);
double expected_hl_exponential(double lambda);

}  // namespace robloc
