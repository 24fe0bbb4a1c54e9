#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fts {

enum class Errc {
  // input parsing
  malformed_row,
  non_positive_price,
  duplicate_date,
  empty_input,
  // http fetch
  network_error,
  http_status,
  timeout,
  // windows
  window_out_of_range,
  window_length_mismatch,
  series_too_short,
  // models
  invalid_parameter,
  invalid_step,
  blowup,
  past_singularity,
  // transforms
  invalid_search_point,
  domain_violation,
  empty_series,
  // unit-root test
  degenerate_regressor,
  zero_residual_variance,
  insufficient_reps,
  invalid_level,
  missing_length,
  // agents
  past_critical_time,
  no_interior_exit,
  // cli
  usage_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Library exception. `detail()` carries the code-specific integer payload:
/// the 1-based input line for row errors, the step index for `blowup`, the
/// HTTP status for `http_status`, and -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::int64_t detail = -1);

  Errc code() const noexcept { return code_; }
  std::int64_t detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::int64_t detail_;
};

}  // namespace fts
