#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sptcl {

/// Error category attached to every exception thrown by this library.
/// The CLI maps these onto process exit codes.
enum class ErrorCode {
  invalid_config,     ///< hyperparameter or option violates its invariants
  missing_input,      ///< file does not exist or cannot be opened
  malformed_file,     ///< bad magic, truncated payload, unparseable token
  non_finite_value,   ///< NaN or infinity in feature data
  dimension_mismatch, ///< incompatible matrix/vector shapes
  class_out_of_range, ///< label outside [0, class_count)
  degenerate_input,   ///< zero-norm sample, identical points for the median heuristic
  numeric_failure,    ///< factorization failure or singular system
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config: return "ConfigError";
    case ErrorCode::missing_input: return "InputError";
    case ErrorCode::malformed_file:
    case ErrorCode::non_finite_value:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::class_out_of_range: return "FormatError";
    case ErrorCode::degenerate_input: return "ConfigError";
    case ErrorCode::numeric_failure: return "NumericError";
  }
  return "Error";
}

// Every randomized operation derives its own generator from a single
// user-supplied seed plus a fixed role offset, so that runs are reproducible
// and independent stages never share a stream.
inline constexpr std::uint64_t kSeedRoleSynthetic = 0;
inline constexpr std::uint64_t kSeedRoleNoise = 1;
inline constexpr std::uint64_t kSeedRoleKernelPairs = 2;

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t role) {
  return base + role;
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t role) {
  return std::mt19937_64(derive_seed(base, role));
}

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
/// (std::uniform_real_distribution is implementation-defined; this is not.)
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Intended for small n (class picks, pair picks).
inline std::int64_t uniform_below(std::mt19937_64& rng, std::int64_t n) {
  auto v = static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(n));
  return v < n ? v : n - 1;
}

}  // namespace sptcl
