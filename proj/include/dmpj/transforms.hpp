// Fractional graph/time transforms and the dynamic multiple-parameter joint
// time-vertex fractional Fourier transform.
#pragma once

#include "dmpj/core.hpp"
#include "dmpj/graph.hpp"
#include "dmpj/spectral.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace dmpj {

enum class TransformType { I, II };

std::string_view to_string(TransformType type);

/// Fractional orders of a joint transform.
///
/// Column t of `graph_orders` is the per-eigenvalue order vector applied to
/// signal column t; `time_orders` holds one order per temporal mode.
struct OrderParams {
  RMatrix graph_orders;
  RVector time_orders;
  TransformType g_type = TransformType::I;
  TransformType d_type = TransformType::I;

  Index n() const { return graph_orders.rows(); }
  Index t() const { return graph_orders.cols(); }

  /// Throws ShapeMismatch / InvalidArgument on inconsistent or non-finite orders.
  void validate() const;

  static OrderParams uniform(Index n, Index t, double alpha, double beta,
                             TransformType g_type = TransformType::I,
                             TransformType d_type = TransformType::I);
};

/// GFT matrix F_G = U_Z^{-1} of a shift operator and its own eigendecomposition.
struct GraphSpectrum {
  CMatrix gft;
  SpectralBasis basis;
};

/// Diagonalizes Z, inverts its eigenvector matrix and diagonalizes the result.
GraphSpectrum graph_spectrum(const CMatrix& gso);

/// As above; the row-normalized adjacency is diagonalized through its
/// symmetric similarity transform so that U_Z stays well defined.
GraphSpectrum graph_spectrum(const Graph& graph, GsoKind kind);

/// Integer GFT powers and inverse-Vandermonde coefficients for MPGFRFT-II.
struct GraphTypeIIFactors {
  std::vector<CMatrix> gft_powers;  // F_G^0 .. F_G^{N-1}
  VandermondeCoeffs vandermonde;
};

GraphTypeIIFactors graph_type_ii_factors(const GraphSpectrum& spectrum);

/// Everything needed to build transforms of N x T signals over one graph.
///
/// The DFT eigenbasis and the powers of K = D_T^{4/T} are computed eagerly.
/// Type-II graph factors are computed on first use under std::call_once, so a
/// TransformBases can be shared between threads.
class TransformBases {
 public:
  TransformBases(GraphSpectrum graph, int steps);

  Index n() const { return graph_.gft.rows(); }
  Index t() const { return time_.size(); }

  const GraphSpectrum& graph() const { return graph_; }
  const SpectralBasis& time() const { return time_; }
  const std::vector<CMatrix>& time_kernel_powers() const { return kernel_powers_; }

  /// Throws IllConditioned when the GFT eigenvalues are not separable.
  const GraphTypeIIFactors& graph_type_ii() const;

 private:
  struct LazyTypeII;

  GraphSpectrum graph_;
  SpectralBasis time_;
  std::vector<CMatrix> kernel_powers_;
  std::shared_ptr<LazyTypeII> type_ii_;
};

CMatrix gfrft_matrix(const SpectralBasis& gft_basis, double alpha);
CMatrix mpgfrft_i_matrix(const SpectralBasis& gft_basis, const RVector& orders);

/// sum_n C_{n, a_n} F_G^n with C_{n, a} = sum_j P(n, j) lambda_j^a.
CMatrix mpgfrft_ii_matrix(const GraphTypeIIFactors& factors, const SpectralBasis& gft_basis,
                          const RVector& orders);
CMatrix mpgfrft_ii_matrix(const SpectralBasis& gft_basis, const RVector& orders);

/// d/da C_{n, a} = sum_j P(n, j) lambda_j^a Log lambda_j.
cplx mpgfrft_ii_coeff(const GraphTypeIIFactors& factors, const SpectralBasis& gft_basis, Index n,
                      double order, bool derivative = false);

/// V_T diag(e^{-i pi k_t b_t / 2}) V_T^T over a DFT eigenbasis.
CMatrix mpdfrft_i_matrix(const SpectralBasis& dft_basis, const RVector& orders);

/// (1/T) (1 - e^{i 2 pi x}) / (1 - e^{i 2 pi x / T}) with x = t - T a / 4 and
/// the removable singularities resolved (1 when x = 0 mod T, 0 at other integers).
cplx mpdfrft_ii_coeff(int t, double order, int steps);

/// d/da of mpdfrft_ii_coeff, from the equivalent geometric sum.
cplx mpdfrft_ii_coeff_derivative(int t, double order, int steps);

/// Powers K^0 .. K^{T-1} of K = D_T^{4/T} built on a DFT eigenbasis.
std::vector<CMatrix> dft_kernel_powers(const SpectralBasis& dft_basis);

CMatrix mpdfrft_ii_matrix(const std::vector<CMatrix>& kernel_powers, const RVector& orders);
CMatrix mpdfrft_ii_matrix(const SpectralBasis& dft_basis, const RVector& orders);

/// F_G^alpha X (D_T^beta)^T (plain transpose).
TimeVaryingSignal jfrft_apply(const TimeVaryingSignal& x, const SpectralBasis& gft_basis,
                              const SpectralBasis& dft_basis, double alpha, double beta);

/// Graph-domain matrix for signal column `column` under params.
CMatrix graph_block(const OrderParams& params, const TransformBases& bases, Index column);

/// Temporal matrix D^b of the chosen type.
CMatrix time_factor(const OrderParams& params, const TransformBases& bases);

/// Column-form DMPJFRFT: [F^{a(1)} x_1, ..., F^{a(T)} x_T] (D^b)^T.
TimeVaryingSignal dmpjfrft_apply(const TimeVaryingSignal& x, const OrderParams& params,
                                 const TransformBases& bases);

/// Factored joint operator.
///
/// Forward operators compose as (time_factor kron I_N) * blkdiag(blocks);
/// inverse operators as blkdiag(blocks) * (time_factor kron I_N).
struct JointOperator {
  enum class Composition { graph_then_time, time_then_graph };

  std::vector<CMatrix> blocks;
  CMatrix time_factor;
  Index n = 0;
  Index t = 0;
  Composition composition = Composition::graph_then_time;
  std::optional<CMatrix> materialized;

  /// Applies the operator to an N x T signal in O(N^2 T + N T^2).
  TimeVaryingSignal apply(const TimeVaryingSignal& x) const;
  CVector apply(const CVector& x) const;

  CMatrix block_diagonal() const;
  /// Dense NT x NT matrix.
  CMatrix dense() const;
  void materialize() { materialized = dense(); }
};

JointOperator dmpjfrft_operator(const OrderParams& params, const TransformBases& bases,
                                bool materialize = false);

/// Numerical inverse blkdiag(F_i)^{-1} ((D^b)^{-1} kron I_N).
/// Throws SingularBlock if any factor has reciprocal condition below 1e-12.
JointOperator dmpjfrft_inverse(const JointOperator& op);

/// Inverse built from the parameters; type-I factors use negated orders
/// (exact), type-II factors are inverted numerically.
JointOperator dmpjfrft_inverse_operator(const OrderParams& params, const TransformBases& bases);

/// Dense Kronecker product a kron b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

}  // namespace dmpj
