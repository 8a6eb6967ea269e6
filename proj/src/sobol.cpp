#include "robloc/sobol.hpp"

#include <bit>
#include <fmt/format.h>

#include "robloc/errors.hpp"

namespace robloc {
namespace {

#include "sobol_table.inc"

constexpr double kInv32 = 1.0 / 4294967296.0;

void check(int dim, std::uint64_t last) {
  if (dim < 1 || dim > kSobolDims)
    throw Error(ErrorKind::unsupported_dimension,
                fmt::format("dim {} outside [1, {}]", dim, kSobolDims));
  if (last >> kSobolBits)
    throw Error(ErrorKind::capacity, "sobol index exceeds 2^32");
}

}  // namespace

int sobol_max_dim() { return kSobolDims; }

void sobol_point(std::uint64_t index, int dim, double* out) {
  check(dim, index);
  std::uint64_t g = index ^ (index >> 1);
  for (int d = 0; d < dim; ++d) {
    std::uint32_t x = 0;
    std::uint64_t h = g;
    for (int b = 0; h; ++b, h >>= 1)
      if (h & 1u) x ^= kSobolV[d][b];
    out[d] = x * kInv32;
  }
}

SobolStream::SobolStream(int dim, std::uint64_t start) : dim_(dim), index_(start), x_(dim) {
  check(dim, start);
  std::uint64_t g = start ^ (start >> 1);
  for (int d = 0; d < dim; ++d) {
    std::uint32_t x = 0;
    std::uint64_t h = g;
    for (int b = 0; h; ++b, h >>= 1)
      if (h & 1u) x ^= kSobolV[d][b];
    x_[d] = x;
  }
}

void SobolStream::next(double* out) {
  for (int d = 0; d < dim_; ++d) out[d] = x_[d] * kInv32;
  // gray(i+1) differs from gray(i) in the bit given by the trailing ones of i
  int c = std::countr_one(index_);
  ++index_;
  if (c >= kSobolBits) throw Error(ErrorKind::capacity, "sobol index exceeds 2^32");
  for (int d = 0; d < dim_; ++d) x_[d] ^= kSobolV[d][c];
}

std::vector<double> sobol_sequence(std::size_t n, int dim, std::uint64_t skip) {
  check(dim, skip + n);
  std::vector<double> out(n * static_cast<std::size_t>(dim));
  SobolStream s(dim, skip);
  for (std::size_t i = 0; i < n; ++i) s.next(out.data() + i * dim);
  return out;
}

}  // namespace robloc
