#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace superk {

/// Portable seeded random source used by every generator and splitter.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distribution layer is written out here instead of using the
/// implementation-defined std:: distributions, so a given seed yields the same
/// numbers on every conforming toolchain:
///   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   normal()   = Box-Muller on (1 - uniform(), uniform()), cosine branch only
///   below(n)   = rejection sampling of next() against the largest multiple of n
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates from the back.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace superk
