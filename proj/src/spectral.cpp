#include "dmpj/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dmpj {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDefectiveCondition = 1e12;
constexpr double kDefectiveResidual = 1e-6;

// Quantized sort key so that conjugate pairs with round-off in the real part
// still order by imaginary part.
double quantize(double x) { return std::round(x * 1e9); }

std::vector<Index> eigen_order(const CVector& values) {
  std::vector<Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double ra = quantize(values(a).real());
    const double rb = quantize(values(b).real());
    if (ra != rb) return ra > rb;
    return quantize(values(a).imag()) > quantize(values(b).imag());
  });
  return idx;
}

// Unit-norm column with its largest-magnitude entry (first on ties) real positive.
void normalize_phase(CMatrix& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    const double nrm = v.col(c).norm();
    if (nrm == 0.0) continue;
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = r;
      }
    }
    const cplx phase = v(best, c) / std::abs(v(best, c));
    v.col(c) *= std::conj(phase) / nrm;
  }
}

void snap_real(CVector& values) {
  for (Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i).imag()) <= 1e-13 * std::abs(values(i))) values(i) = cplx(values(i).real(), 0.0);
  }
}

SpectralBasis finish_unitary(CMatrix vectors, CVector values) {
  snap_real(values);
  const auto order = eigen_order(values);
  SpectralBasis b;
  const Index n = values.size();
  b.vectors.resize(n, n);
  b.values.resize(n);
  for (Index k = 0; k < n; ++k) {
    b.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    b.values(k) = values(order[static_cast<std::size_t>(k)]);
  }
  normalize_phase(b.vectors);
  b.inverse_vectors = b.vectors.adjoint();
  b.unitary = true;
  b.condition = 1.0;
  return b;
}

double condition_number(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

bool is_hermitian(const CMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i; j < m.cols(); ++j) {
      if (m(i, j) != std::conj(m(j, i))) return false;
    }
  }
  return true;
}

cplx unit_root_quarter(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

}  // namespace

CMatrix SpectralBasis::reconstruct() const { return vectors * values.asDiagonal() * inverse_vectors; }

SpectralBasis diagonalize(const CMatrix& matrix) {
  require(matrix.rows() == matrix.cols() && matrix.rows() > 0, ErrorCode::ShapeMismatch,
          "diagonalize needs a nonempty square matrix");
  require(matrix.allFinite(), ErrorCode::InvalidArgument, "matrix has non-finite entries");
  const Index n = matrix.rows();
  const double mnorm = matrix.norm();

  if (is_hermitian(matrix)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix);
    require(es.info() == Eigen::Success, ErrorCode::Defective, "self-adjoint eigensolver failed");
    return finish_unitary(es.eigenvectors(), es.eigenvalues().cast<cplx>());
  }

  const CMatrix commutator = matrix * matrix.adjoint() - matrix.adjoint() * matrix;
  if (commutator.norm() <= 1e-12 * mnorm * mnorm) {
    Eigen::ComplexSchur<CMatrix> schur(matrix);
    if (schur.info() == Eigen::Success) {
      const CMatrix& t = schur.matrixT();
      const CMatrix off = t.triangularView<Eigen::StrictlyUpper>();
      if (off.norm() <= 1e-12 * std::max(mnorm, 1e-300)) {
        return finish_unitary(schur.matrixU(), t.diagonal());
      }
    }
  }

  Eigen::ComplexEigenSolver<CMatrix> es(matrix, true);
  require(es.info() == Eigen::Success, ErrorCode::Defective, "eigensolver did not converge");
  CVector values = es.eigenvalues();
  snap_real(values);
  const auto order = eigen_order(values);
  SpectralBasis b;
  b.vectors.resize(n, n);
  b.values.resize(n);
  for (Index k = 0; k < n; ++k) {
    b.vectors.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    b.values(k) = values(order[static_cast<std::size_t>(k)]);
  }
  normalize_phase(b.vectors);
  b.condition = condition_number(b.vectors);
  require(std::isfinite(b.condition) && b.condition <= kDefectiveCondition, ErrorCode::Defective,
          "eigenvector matrix is singular (condition " + std::to_string(b.condition) +
              "); the operator is not diagonalizable");
  b.inverse_vectors = b.vectors.fullPivLu().inverse();
  const double residual = (b.reconstruct() - matrix).norm();
  require(residual <= kDefectiveResidual * std::max(mnorm, 1e-300), ErrorCode::Defective,
          "reconstruction residual " + std::to_string(residual) + " too large");
  b.unitary = false;
  return b;
}

cplx principal_power(cplx value, double order) {
  const double r = std::abs(value);
  if (r < 1e-14) {
    require(order >= 0.0, ErrorCode::ZeroEigenvalue, "negative power of a zero eigenvalue");
    return order == 0.0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  }
  if (order == 0.0) return {1.0, 0.0};
  if (order == 1.0) return value;
  double arg = std::arg(value);
  if (arg <= -kPi) arg = kPi;
  return std::polar(std::exp(order * std::log(r)), order * arg);
}

CMatrix fractional_matrix_power(const SpectralBasis& basis, const RVector& orders) {
  require(orders.size() == basis.size(), ErrorCode::ShapeMismatch, "orders length must match basis size");
  CVector p(basis.size());
  for (Index k = 0; k < basis.size(); ++k) p(k) = principal_power(basis.values(k), orders(k));
  return basis.vectors * p.asDiagonal() * basis.inverse_vectors;
}

CMatrix fractional_matrix_power(const SpectralBasis& basis, double order) {
  return fractional_matrix_power(basis, RVector::Constant(basis.size(), order));
}

CMatrix dft_matrix(int steps) {
  require(steps >= 1, ErrorCode::InvalidArgument, "DFT size must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(steps));
  CMatrix d(steps, steps);
  for (int m = 0; m < steps; ++m) {
    for (int n = 0; n < steps; ++n) {
      const long long mn = (static_cast<long long>(m) * n) % steps;
      d(m, n) = std::polar(scale, -2.0 * kPi * static_cast<double>(mn) / steps);
    }
  }
  return d;
}

cplx dft_eigenvalue_power(int index, double order) {
  if (order == 1.0) return unit_root_quarter(index);
  return std::polar(1.0, -kPi * index * order / 2.0);
}

SpectralBasis dft_eigenbasis(int steps) {
  require(steps >= 1, ErrorCode::InvalidArgument, "DFT size must be positive");
  const int t = steps;

  RMatrix s = RMatrix::Zero(t, t);
  for (int n = 0; n < t; ++n) {
    s(n, n) += 2.0 * std::cos(2.0 * kPi * n / t) - 4.0;
    s(n, (n + 1) % t) += 1.0;
    s(n, (n - 1 + t) % t) += 1.0;
  }

  // Orthonormal bases of even (x[n] = x[-n]) and odd (x[n] = -x[-n]) sequences.
  const double h = std::sqrt(0.5);
  std::vector<RVector> even, odd;
  {
    RVector e0 = RVector::Zero(t);
    e0(0) = 1.0;
    even.push_back(e0);
  }
  for (int n = 1; n <= (t - 1) / 2; ++n) {
    RVector e = RVector::Zero(t);
    RVector o = RVector::Zero(t);
    e(n) = h;
    e(t - n) = h;
    o(n) = h;
    o(t - n) = -h;
    even.push_back(e);
    odd.push_back(o);
  }
  if (t % 2 == 0 && t > 1) {
    RVector e = RVector::Zero(t);
    e(t / 2) = 1.0;
    even.push_back(e);
  }

  std::vector<std::pair<int, RVector>> tagged;
  auto solve_parity = [&](const std::vector<RVector>& cols, int parity) {
    if (cols.empty()) return;
    RMatrix e(t, static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) e.col(static_cast<Index>(i)) = cols[i];
    const RMatrix restricted = e.transpose() * s * e;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(restricted);
    // ascending from the solver; rank by descending S eigenvalue
    const Index m = restricted.rows();
    for (Index r = 0; r < m; ++r) {
      RVector v = e * es.eigenvectors().col(m - 1 - r);
      tagged.emplace_back(static_cast<int>(2 * r + parity), std::move(v));
    }
  };
  solve_parity(even, 0);
  solve_parity(odd, 1);
  std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  SpectralBasis b;
  b.vectors.resize(t, t);
  b.values.resize(t);
  for (int j = 0; j < t; ++j) {
    RVector v = tagged[static_cast<std::size_t>(j)].second;
    Index best = 0;
    v.cwiseAbs().maxCoeff(&best);
    if (v(best) < 0) v = -v;
    v.normalize();
    b.vectors.col(j) = v.cast<cplx>();
    const int k = tagged[static_cast<std::size_t>(j)].first;
    b.hermite_index.push_back(k);
    b.phase_index.push_back(k < t ? k : t % 4);
    b.values(j) = unit_root_quarter(k);
  }
  b.inverse_vectors = b.vectors.transpose();
  b.unitary = true;
  b.condition = 1.0;
  return b;
}

VandermondeCoeffs inverse_vandermonde(const CVector& values) {
  const Index n = values.size();
  require(n >= 1, ErrorCode::InvalidArgument, "no Vandermonde nodes");
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      require(std::abs(values(i) - values(j)) > 1e-10, ErrorCode::IllConditioned,
              "Vandermonde nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }
  }
  CMatrix w(n, n);
  for (Index j = 0; j < n; ++j) {
    cplx p(1.0, 0.0);
    for (Index k = 0; k < n; ++k) {
      w(j, k) = p;
      p *= values(j);
    }
  }
  const Eigen::FullPivLU<CMatrix> lu(w);
  require(lu.isInvertible(), ErrorCode::IllConditioned, "Vandermonde matrix is singular");
  VandermondeCoeffs c;
  c.p_matrix = lu.solve(CMatrix::Identity(n, n));
  c.source_values = values;
  const double residual = (c.p_matrix * w - CMatrix::Identity(n, n)).norm();
  require(std::isfinite(residual) && residual <= 1e-6, ErrorCode::IllConditioned,
          "inverse Vandermonde residual " + std::to_string(residual));
  return c;
}

}  // namespace dmpj
