#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace robloc::detail {

inline constexpr std::size_t kChunk = 1u << 15;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t task) {
  return splitmix64(seed ^ splitmix64(task));
}

// k distinct indices from [0, n), in draw order.
class IndexDrawer {
 public:
  explicit IndexDrawer(std::size_t n) : n_(n) {}

  template <class Gen>
  void draw(std::size_t k, Gen& gen, std::vector<std::size_t>& out) {
    out.clear();
    if (k <= 32) {
      // Floyd
      for (std::size_t j = n_ - k; j < n_; ++j) {
        std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(gen);
        if (std::find(out.begin(), out.end(), t) != out.end()) t = j;
        out.push_back(t);
      }
      return;
    }
    if (buf_.size() != n_) {
      buf_.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) buf_[i] = i;
    }
    swaps_.clear();
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t r = std::uniform_int_distribution<std::size_t>(j, n_ - 1)(gen);
      std::swap(buf_[j], buf_[r]);
      swaps_.push_back(r);
      out.push_back(buf_[j]);
    }
    for (std::size_t j = k; j-- > 0;) std::swap(buf_[j], buf_[swaps_[j]]);
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> buf_;
  std::vector<std::size_t> swaps_;
};

// Maps quasi-random coordinates onto k distinct indices: coordinate j picks among
// the n - j indices not yet taken.
inline void quasi_indices(const double* u, std::size_t k, std::size_t n,
                          std::vector<std::size_t>& taken, std::vector<std::size_t>& out) {
  taken.clear();
  out.clear();
  for (std::size_t j = 0; j < k; ++j) {
    auto r = static_cast<std::size_t>(u[j] * static_cast<double>(n - j));
    if (r >= n - j) r = n - j - 1;
    for (std::size_t t : taken) {
      if (t <= r)
        ++r;
      else
        break;
    }
    taken.insert(std::upper_bound(taken.begin(), taken.end(), r), r);
    out.push_back(r);
  }
}

}  // namespace robloc::detail
