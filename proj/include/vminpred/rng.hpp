#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vminpred::num {

/// Deterministic random stream. std::mt19937_64 output is fully specified by
/// the standard, and the distributions below are hand-rolled because the
/// standard-library ones are implementation-defined; the same seed therefore
/// produces the same bytes on every toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {  // [0, 1), 53-bit resolution
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal(double mu = 0.0, double sigma = 1.0) {
    if (!has_spare_) {
      // Box-Muller; consume two uniforms, cache the second deviate
      double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
      double u2 = uniform01();
      double r = std::sqrt(-2.0 * std::log(u1));
      spare_ = r * std::sin(2.0 * M_PI * u2);
      has_spare_ = true;
      return mu + sigma * r * std::cos(2.0 * M_PI * u2);
    }
    has_spare_ = false;
    return mu + sigma * spare_;
  }

  /// Unbiased draw from {0, ..., n-1} via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Fisher-Yates shuffle using this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Derives a substream seed from a base seed and a textual tag (FNV-1a),
  /// so per-group streams don't depend on iteration order.
  static std::uint64_t mix(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 14695981039346656037ull;
    auto eat = [&h](std::uint64_t word) {
      for (int i = 0; i < 8; ++i) {
        h ^= (word >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    eat(seed);
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    eat(index);
    return h;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace vminpred::num
