// Scalar type, error taxonomy, and small shared utilities.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ifdm {

using Real = double;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kTwoPi = 2.0 * kPi;

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidFieldError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct UnsupportedBackendError : Error { using Error::Error; };
struct NotCurlSolvableError : Error { using Error::Error; };
struct IllPosedPotentialError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct StepSizeError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Config parse/validation error carrying the offending line (1-based, 0 = n/a).
struct ConfigError : Error {
  int line = 0;
  ConfigError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

// Derivative backends for the differential operators.
enum class Backend { spectral, fd2 };

inline const char* to_string(Backend b) {
  return b == Backend::spectral ? "spectral" : "fd2";
}

// Alternating tensor e_{ijk} on 0-based indices.
constexpr int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  // Even permutations of (0,1,2).
  if ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) return 1;
  return -1;
}

// Deterministic uniform double in [-1, 1) from a 64-bit generator state.
// std::uniform_real_distribution is implementation-defined; this is not.
template <class Rng>
inline Real uniform_pm1(Rng& rng) {
  const std::uint64_t bits = rng() >> 11;  // 53 random bits
  return 2.0 * (static_cast<Real>(bits) * 0x1p-53) - 1.0;
}

}  // namespace ifdm
