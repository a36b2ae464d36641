#pragma once

#include <cstdint>
#include <random>

namespace isograph {

/// Portable pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so uniform and normal variates are derived here
/// from raw engine output:
///   uniform(): top 53 bits of one draw scaled by 2^-53, in [0, 1);
///   normal():  Box-Muller on two uniforms, second variate cached;
///   below(n):  rejection sampling on the top bits, unbiased.
/// Identical seeds therefore give bit-identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; used for per-restart and per-stage seeds.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace isograph
