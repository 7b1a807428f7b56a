#pragma once
#include <stdexcept>
#include <string>

namespace lpb {

// Library-wide exception. The fixed strings in msg:: are load-bearing: callers and
// tests match on them verbatim, so they must not be reworded casually.
struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};

[[noreturn]] inline void fail(const std::string& m) { throw Error(m); }

namespace msg {
inline constexpr const char* insufficient_resolution = "insufficient resolution";
inline constexpr const char* undefined_zero_mode     = "undefined zero mode";
inline constexpr const char* elliptic_stagnation     = "elliptic solver stagnation";
inline constexpr const char* perturbation_too_large  = "perturbation too large";
inline constexpr const char* continuation_failure    = "continuation failure";
inline constexpr const char* splitting_unreachable   = "splitting threshold unreachable on this grid";
inline constexpr const char* flow_not_invertible     = "flow not invertible on grid";
inline constexpr const char* inverse_stagnation      = "inverse iteration stagnation";
inline constexpr const char* linear_fp_failed        = "linear fixed point failed; reduce T or data";
inline constexpr const char* no_horizon              = "no admissible local horizon at this resolution";
} // namespace msg

} // namespace lpb
