#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace csd {

/// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

/// Derives a child seed from a master seed and a path of tags.
/// Different paths give statistically independent seeds, so per-trial
/// streams can be created in any order (or concurrently) without
/// changing the values they produce.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

/// A self-contained random stream. All distributions are generated from
/// raw engine words with fixed algorithms (no std::*_distribution), so a
/// given seed produces the same values on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream derived(std::uint64_t master,
                           std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_seed(master, path));
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos();

  /// Standard normal via Box-Muller; the paired value is cached.
  double normal();

  /// Uniform integer in [0, n).
  int uniform_int(int n);

  /// Index i with probability weights[i]; weights must sum to ~1.
  int pick_weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace csd
