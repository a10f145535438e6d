#include "normforge/common.hpp"

namespace normforge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kRankDeficient: return "rank_deficient";
    case ErrorKind::kChordFailure: return "chord_failure";
    case ErrorKind::kNotConverged: return "not_converged";
    case ErrorKind::kCertificateFailure: return "certificate_failure";
    case ErrorKind::kRetriesExhausted: return "retries_exhausted";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace normforge
