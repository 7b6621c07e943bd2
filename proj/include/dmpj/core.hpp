// Common numeric types and the error type shared by every dmpj module.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dmpj {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Complex N x T matrix: row i is vertex i, column t is time step t.
using TimeVaryingSignal = CMatrix;

/// Grayscale image, pixel (r, c) at row r, column c, nominal range [0, 255].
using Image = RMatrix;

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  DimensionMismatch,
  IsolatedVertex,
  TooFewPoints,
  NonDivisibleDimensions,
  Defective,
  ZeroEigenvalue,
  IllConditioned,
  SingularBlock,
  NonDifferentiablePoint,
  DivergedLoss,
  TooFewSamples,
  ZeroReference,
  TooSmall,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// True for failures caused by the numbers rather than by the request.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

/// Column-stacked vectorization, vec(X).
inline CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvec(const CVector& v, Index rows, Index cols) {
  require(v.size() == rows * cols, ErrorCode::ShapeMismatch, "vector length does not match rows*cols");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

/// ||a - b||_F / max(||b||_F, tiny).
template <typename A, typename B>
double relative_error(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double denom = b.norm();
  return (a - b).norm() / (denom > 1e-300 ? denom : 1.0);
}

}  // namespace dmpj
