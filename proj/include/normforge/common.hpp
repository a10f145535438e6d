#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace normforge {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kRankDeficient,
  kChordFailure,
  kNotConverged,
  kCertificateFailure,
  kRetriesExhausted,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& v) {
  return v.allFinite();
}

inline void require_finite(const Vector& x, const char* where) {
  if (!x.allFinite()) {
    fail(ErrorKind::kNonFinite, std::string(where) + ": non-finite input");
  }
}

}  // namespace normforge
