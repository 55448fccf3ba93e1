#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zz {

// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream number `stream` of a run keyed by `base`. Streams with
// distinct numbers are treated as independent.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 with explicit draw formulas. The standard <random> distribution
// objects have implementation-defined sequences; the draws below are pinned so
// that identical seeds give identical streams on any platform, which the
// reproducibility contract relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform on [0,1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  // uniform on the open interval (0,1); never exactly 0 or 1
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  // integer in [0, n), n >= 1
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // unit-rate exponential, strictly positive
  double exponential() { return -std::log(uniform_open()); }

  // standard normal (Box-Muller, first coordinate)
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // standard Laplace, density exp(-|x|)/2
  double laplace() {
    const double u = uniform_open();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace zz
