#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mwlab {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

enum class ErrorKind {
  InvalidArgument,
  NotStochastic,
  Reducible,
  SolveFailure,
  NoConvergence,
  InvalidRegime,
  MissingEdge,
  DegenerateD,
  TooLarge,
  ParseError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidRegime: return "InvalidRegime";
    case ErrorKind::MissingEdge: return "MissingEdge";
    case ErrorKind::DegenerateD: return "DegenerateD";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind; the
/// message is prefixed with the kind name so CLI diagnostics name it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace mwlab
