#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rollforge {

inline constexpr const char* kToolVersion = "rollforge 0.1.0";

// --- Errors ---
// Mapped to CLI exit codes: ConfigError -> 2, MissingInputError -> 3,
// NumericError -> 4. Contract misuse throws std::invalid_argument.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- Hashing (FNV-1a, 64 bit) ---

inline uint64_t fnv1a64_bytes(const void* data, size_t n,
                              uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64_bytes(s.data(), s.size(), h);
}

std::string hash_hex(uint64_t h);

// Seed propagation: stage seed = base seed XOR hash of the stage tag.
inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return base ^ fnv1a64(tag);
}

// Per-item sub-streams (episode index, goal index, ...).
inline uint64_t derive_seed(uint64_t base, uint64_t n) {
  // splitmix64 finalizer over (base, n)
  uint64_t z = base + 0x9e3779b97f4a7c15ull * (n + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// --- Seeded RNG ---
// std::mt19937_64 output is pinned by the standard; the distribution mappings
// below are hand-rolled so draws do not depend on libstdc++ internals.

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  size_t uniform_index(size_t n) { return static_cast<size_t>(next_u64() % n); }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller, spare discarded so the draw count per call is fixed.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

// --- Numeric guards ---

inline void require_finite(double v, const char* context) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite value in ") + context);
  }
}

}  // namespace rollforge
