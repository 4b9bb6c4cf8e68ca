#pragma once

// Deterministic noise and hashing. std::normal_distribution's output is
// implementation-defined, which would break byte-level reproducibility of
// logs across standard libraries, so the Gaussian transform is spelled out
// here on top of mt19937_64 (whose sequence IS pinned by the standard).

#include <cmath>
#include <cstdint>
#include <string>
#include <random>

namespace indilab::rng {

/// Standard-normal stream via the Box–Muller transform over mt19937_64.
/// Same seed => same sequence, on every platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // uniforms in (0,1]: +1 before scaling keeps log() off zero
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// FNV-1a 64-bit over a byte string; used to fingerprint resolved configs.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Hash rendered as fixed-width hex, the form stored in log metadata.
inline std::string fnv1a64_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace indilab::rng
