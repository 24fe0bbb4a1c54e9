#include "fts/error.hpp"

namespace fts {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_positive_price: return "NonPositivePrice";
    case Errc::duplicate_date: return "DuplicateDate";
    case Errc::empty_input: return "EmptyInput";
    case Errc::network_error: return "NetworkError";
    case Errc::http_status: return "HttpStatus";
    case Errc::timeout: return "Timeout";
    case Errc::window_out_of_range: return "WindowOutOfRange";
    case Errc::window_length_mismatch: return "WindowLengthMismatch";
    case Errc::series_too_short: return "SeriesTooShort";
    case Errc::invalid_parameter: return "InvalidParameter";
    case Errc::invalid_step: return "InvalidStep";
    case Errc::blowup: return "Blowup";
    case Errc::past_singularity: return "PastSingularity";
    case Errc::invalid_search_point: return "InvalidSearchPoint";
    case Errc::domain_violation: return "DomainViolation";
    case Errc::empty_series: return "EmptySeries";
    case Errc::degenerate_regressor: return "DegenerateRegressor";
    case Errc::zero_residual_variance: return "ZeroResidualVariance";
    case Errc::insufficient_reps: return "InsufficientReps";
    case Errc::invalid_level: return "InvalidLevel";
    case Errc::missing_length: return "MissingLength";
    case Errc::past_critical_time: return "PastCriticalTime";
    case Errc::no_interior_exit: return "NoInteriorExit";
    case Errc::usage_error: return "UsageError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::int64_t detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

}  // namespace fts
