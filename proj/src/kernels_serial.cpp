// Single-threaded reference for kernel_values. Kept deliberately plain; the
// parallel version must reproduce its multiset exactly.
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "draw.hpp"
#include "robloc/kernels.hpp"
#include "robloc/sobol.hpp"

namespace robloc::serial {
namespace {

double value(const SortedSample& s, const KernelSpec& spec, std::vector<std::size_t> idx) {
  const auto x = s.values();
  if (spec.uniform_weights()) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += x[i];
    return sum / static_cast<double>(idx.size());
  }
  std::sort(idx.begin(), idx.end());
  double sum = 0.0, w = 0.0;
  for (double v : spec.weights) w += v;
  for (std::size_t j = 0; j < idx.size(); ++j) sum += spec.weights[j] * x[idx[j]];
  return sum / w;
}

}  // namespace

std::vector<double> kernel_values(const SortedSample& s, const KernelSpec& spec) {
  const KernelPlan p = resolve_kernel(s.size(), spec);
  const std::size_t n = s.size();
  std::vector<double> out;
  if (p.exact) {
    // lexicographic walk over K-subsets
    const std::size_t kk = p.kk;
    std::vector<std::size_t> idx(kk);
    for (std::size_t j = 0; j < kk; ++j) idx[j] = j;
    for (;;) {
      out.push_back(value(s, spec, idx));
      std::size_t j = kk;
      while (j > 0 && idx[j - 1] == n - kk + j - 1) --j;
      if (j == 0) break;
      ++idx[j - 1];
      for (std::size_t i = j; i < kk; ++i) idx[i] = idx[i - 1] + 1;
    }
    return out;
  }
  const auto kf = static_cast<std::size_t>(std::floor(spec.k));
  const auto kc = static_cast<std::size_t>(std::ceil(spec.k));
  detail::IndexDrawer drawer(n);
  std::vector<std::size_t> idx, taken;
  std::vector<double> u(kc);
  std::mt19937_64 gen;
  std::optional<SobolStream> qs;
  out.resize(p.plan.total);
  for (std::size_t d = 0; d < p.plan.total; ++d) {
    if (d % detail::kChunk == 0) {
      gen.seed(detail::substream_seed(spec.seed, d / detail::kChunk));
      if (spec.index == IndexStream::quasi) qs.emplace(static_cast<int>(kc), d + 1);
    }
    const std::size_t size = d < p.plan.draws_floor ? kf : kc;
    if (qs) {
      qs->next(u.data());
      detail::quasi_indices(u.data(), size, n, taken, idx);
    } else {
      drawer.draw(size, gen, idx);
    }
    out[d] = value(s, spec, idx);
  }
  return out;
}

}  // namespace robloc::serial
