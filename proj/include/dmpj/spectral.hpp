// Eigendecompositions and fractional matrix powers.
#pragma once

#include "dmpj/core.hpp"

#include <vector>

namespace dmpj {

/// Diagonalization M = vectors * diag(values) * inverse_vectors.
struct SpectralBasis {
  CMatrix vectors;
  CVector values;
  CMatrix inverse_vectors;
  /// 2-norm condition number of `vectors` (1 for unitary bases).
  double condition = 1.0;
  /// inverse_vectors is the conjugate transpose of vectors.
  bool unitary = false;
  /// DFT bases only: Hermite index k of each column (e^{-i pi k / 2} eigenvalue).
  std::vector<int> hermite_index;
  /// DFT bases only: index used for fractional powers, congruent to
  /// hermite_index mod 4 and always in [0, max(T-1, 2)].
  std::vector<int> phase_index;

  Index size() const { return values.size(); }
  CMatrix reconstruct() const;
};

/// Full eigendecomposition of a square complex matrix.
///
/// Hermitian input uses a self-adjoint solver, other normal matrices a Schur
/// decomposition, both giving a unitary basis. Everything else goes through a
/// general eigensolver. Eigenvalues are ordered by descending real part, then
/// descending imaginary part; equal keys keep solver order. Throws Defective if
/// the basis is numerically singular (condition > 1e12) or the reconstruction
/// residual exceeds 1e-6 ||M||_F.
SpectralBasis diagonalize(const CMatrix& matrix);

/// value^order on the principal branch, Arg in (-pi, pi].
/// Zero values: order > 0 gives 0, order == 0 gives 1, order < 0 throws ZeroEigenvalue.
cplx principal_power(cplx value, double order);

/// V diag(lambda_k^{orders_k}) V^{-1}.
CMatrix fractional_matrix_power(const SpectralBasis& basis, const RVector& orders);
CMatrix fractional_matrix_power(const SpectralBasis& basis, double order);

/// Unitary DFT, entry (m, n) = exp(-2 pi i m n / T) / sqrt(T).
CMatrix dft_matrix(int steps);

/// Real orthonormal Hermite-like eigenbasis of the unitary DFT.
///
/// Built from the commuting matrix S (2cos(2 pi n / T) - 4 on the diagonal,
/// ones on the circulant off-diagonals) restricted to the even and odd
/// subspaces. Within each parity, vectors are ranked by descending S
/// eigenvalue and given Hermite indices 0, 2, 4, ... or 1, 3, 5, ...; for even
/// T this skips T - 1 and ends at T. Columns are sorted by Hermite index.
SpectralBasis dft_eigenbasis(int steps);

/// e^{-i pi k order / 2}, the fractional power of a DFT eigenvalue with index k.
cplx dft_eigenvalue_power(int index, double order);

struct VandermondeCoeffs {
  /// P = W^{-1} with W(j, n) = source_values_j^n.
  CMatrix p_matrix;
  CVector source_values;
};

/// Inverse Vandermonde matrix, solved column by column with a pivoted LU.
/// Throws IllConditioned if two nodes are closer than 1e-10 or ||P W - I||_F > 1e-6.
VandermondeCoeffs inverse_vandermonde(const CVector& values);

}  // namespace dmpj
