#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dro {

/// Seedable generator with platform-independent transforms.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std:: distribution adaptors are not, so uniform, normal and
/// gamma variates are produced here from raw engine output.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/dro-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1); never returns 0.
  double uniform_open();
  double normal();
  /// Gamma(shape, 1). Shape 0 yields 0.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with stream indices (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace dro
