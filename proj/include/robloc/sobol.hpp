#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace robloc {

// Unscrambled Sobol points, Joe-Kuo direction numbers, 32-bit resolution.
int sobol_max_dim();

// Point `index` of the raw sequence (index 0 is the origin). `out` gets `dim` coordinates.
void sobol_point(std::uint64_t index, int dim, double* out);

// Row-major n x dim block of points index skip, skip+1, ...
std::vector<double> sobol_sequence(std::size_t n, int dim, std::uint64_t skip);

// Incremental generator over consecutive indices, gray-code order.
class SobolStream {
 public:
  SobolStream(int dim, std::uint64_t start);
  // Writes the point at the current index and advances.
  void next(double* out);
  std::uint64_t index() const { return index_; }

 private:
  int dim_;
  std::uint64_t index_;
  std::vector<std::uint32_t> x_;
};

}  // namespace robloc
