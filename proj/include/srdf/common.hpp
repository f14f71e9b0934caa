#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace srdf {

enum class ErrorCode {
  invalid_argument = 1,
  unparseable_instruction,
  unknown_node,
  invalid_trajectory,
  mismatched_environment,
  schema_violation,
  io,
  non_finite_loss,
  missing_model,
  empty_filter,
  empty_input,
  invariant_violation,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class UnparseableInstruction : public Error {
 public:
  explicit UnparseableInstruction(const std::string& what)
      : Error(ErrorCode::unparseable_instruction, what) {}
};

// ---------------------------------------------------------------------------
// Deterministic randomness. The engine is std::mt19937_64 (bit-identical on
// every conforming implementation); the std:: distributions are not, so the
// two draws we need are spelled out here.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed and a list of tags.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
  std::uint64_t h = splitmix64(base);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(tags))), ...);
  return h;
}

// ---------------------------------------------------------------------------
// Angles. Headings are compass degrees: 0 = +y (north), 90 = +x (east).
// ---------------------------------------------------------------------------

inline double normalize_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

// Maps to (-180, 180]. Positive is clockwise (to the right).
inline double normalize_delta(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

inline constexpr int kSectorCount = 8;

// Relative sector of an angular offset: 0 ahead, 2 right, 4 behind, 6 left.
inline int sector_of_delta(double delta_deg) {
  const double shifted = normalize_heading(delta_deg + 22.5);
  int s = static_cast<int>(shifted / 45.0);
  return s >= kSectorCount ? kSectorCount - 1 : s;
}

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace srdf

namespace srdf {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace srdf
