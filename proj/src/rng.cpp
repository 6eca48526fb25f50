#include "csdesign/rng.hpp"

#include <cmath>
#include <numbers>

#include "csdesign/errors.hpp"

namespace csd {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t tag : path) {
    s = mix64(s ^ mix64(tag));
  }
  return s;
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw InvalidInputError("uniform_int: n must be positive");
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit =
      UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int>(x % static_cast<std::uint64_t>(n));
}

int RngStream::pick_weighted(std::span<const double> weights) {
  if (weights.empty()) throw InvalidInputError("pick_weighted: empty weights");
  const double u = uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size() - 1);
}

}  // namespace csd
