#pragma once

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "robloc/errors.hpp"
#include "robloc/estimators.hpp"

#define EXPECT_ERROR_KIND(stmt, k)                                          \
  do {                                                                      \
    try {                                                                   \
      stmt;                                                                 \
      ADD_FAILURE() << "no exception from " #stmt;                          \
    } catch (const robloc::Error& e__) {                                    \
      EXPECT_EQ(e__.kind(), k) << e__.what();                               \
    }                                                                       \
  } while (0)

namespace testutil {

inline std::vector<double> iota_sample(int n) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

inline robloc::SortedSample iota(int n) { return robloc::SortedSample::from_sorted(iota_sample(n)); }

inline robloc::SortedSample random_sample(std::mt19937_64& g, std::size_t n) {
  std::lognormal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return robloc::SortedSample::from_unsorted(std::move(v));
}

// X_i + X_{n-i+1} = 2c for every i
inline robloc::SortedSample mirror_sample(std::mt19937_64& g, std::size_t n, double c) {
  std::exponential_distribution<double> d(1.0);
  std::vector<double> v;
  for (std::size_t i = 0; i < n / 2; ++i) {
    double x = d(g);
    v.push_back(c + x);
    v.push_back(c - x);
  }
  if (n % 2) v.push_back(c);
  return robloc::SortedSample::from_unsorted(std::move(v));
}

}  // namespace testutil
