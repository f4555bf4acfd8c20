#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sfzsl {

/// Seeded generator used for every random draw in the project.
///
/// Uniform and Gaussian variates are derived from the raw 64-bit output of
/// std::mt19937_64 (whose sequence is fixed by the standard) rather than from
/// the implementation-defined standard distributions, so runs agree across
/// standard libraries up to libm rounding.
class Rng {
 public:
  static constexpr const char* kGeneratorName = "mt19937_64+boxmuller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derive an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace sfzsl
