#include "dmpj/transforms.hpp"

#include <Eigen/LU>

#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>

namespace dmpj {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularRcond = 1e-12;

cplx principal_log(cplx value) {
  double arg = std::arg(value);
  if (arg <= -kPi) arg = kPi;
  return {std::log(std::abs(value)), arg};
}

CMatrix checked_inverse(const CMatrix& m, const char* what) {
  const Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  require(std::isfinite(rc) && rc >= kSingularRcond, ErrorCode::SingularBlock,
          std::string(what) + " is numerically singular (rcond " + std::to_string(rc) + ")");
  return lu.inverse();
}

}  // namespace

std::string_view to_string(TransformType type) { return type == TransformType::I ? "I" : "II"; }

void OrderParams::validate() const {
  require(graph_orders.rows() >= 1 && graph_orders.cols() >= 1, ErrorCode::ShapeMismatch,
          "graph orders must be a nonempty N x T matrix");
  require(time_orders.size() == graph_orders.cols(), ErrorCode::ShapeMismatch,
          "time orders length must equal the number of columns of the graph orders");
  require(graph_orders.allFinite() && time_orders.allFinite(), ErrorCode::InvalidArgument,
          "orders must be finite");
}

OrderParams OrderParams::uniform(Index n, Index t, double alpha, double beta, TransformType g_type,
                                 TransformType d_type) {
  OrderParams p;
  p.graph_orders = RMatrix::Constant(n, t, alpha);
  p.time_orders = RVector::Constant(t, beta);
  p.g_type = g_type;
  p.d_type = d_type;
  return p;
}

GraphSpectrum graph_spectrum(const CMatrix& gso) {
  const SpectralBasis shift = diagonalize(gso);
  GraphSpectrum s;
  s.gft = shift.inverse_vectors;
  s.basis = diagonalize(s.gft);
  return s;
}

GraphSpectrum graph_spectrum(const Graph& graph, GsoKind kind) {
  if (kind != GsoKind::row_normalized_adjacency || graph.directed()) {
    return graph_spectrum(CMatrix(build_gso(graph, kind).cast<cplx>()));
  }
  // D^{-1} A = D^{-1/2} S D^{1/2} with S symmetric, so U_Z = D^{-1/2} Q_S.
  const RMatrix sym = build_gso(graph, GsoKind::symmetric_normalized_adjacency);
  const SpectralBasis sb = diagonalize(CMatrix(sym.cast<cplx>()));
  const RVector inv_sqrt_deg = graph.degrees().cwiseSqrt().cwiseInverse();
  CMatrix u = inv_sqrt_deg.cast<cplx>().asDiagonal() * sb.vectors;
  for (Index c = 0; c < u.cols(); ++c) {
    u.col(c).normalize();
    Index best = 0;
    u.col(c).cwiseAbs().maxCoeff(&best);
    if (u(best, c).real() < 0) u.col(c) = -u.col(c);
  }
  GraphSpectrum s;
  s.gft = u.fullPivLu().inverse();
  s.basis = diagonalize(s.gft);
  return s;
}

GraphTypeIIFactors graph_type_ii_factors(const GraphSpectrum& spectrum) {
  const Index n = spectrum.gft.rows();
  GraphTypeIIFactors f;
  f.vandermonde = inverse_vandermonde(spectrum.basis.values);
  f.gft_powers.reserve(static_cast<std::size_t>(n));
  f.gft_powers.push_back(CMatrix::Identity(n, n));
  for (Index k = 1; k < n; ++k) f.gft_powers.push_back(spectrum.gft * f.gft_powers.back());
  return f;
}

struct TransformBases::LazyTypeII {
  std::once_flag once;
  std::optional<GraphTypeIIFactors> value;
  std::exception_ptr error;
};

TransformBases::TransformBases(GraphSpectrum graph, int steps)
    : graph_(std::move(graph)),
      time_(dft_eigenbasis(steps)),
      kernel_powers_(dft_kernel_powers(time_)),
      type_ii_(std::make_shared<LazyTypeII>()) {}

const GraphTypeIIFactors& TransformBases::graph_type_ii() const {
  std::call_once(type_ii_->once, [this] {
    try {
      type_ii_->value = graph_type_ii_factors(graph_);
    } catch (...) {
      type_ii_->error = std::current_exception();
    }
  });
  if (type_ii_->error) std::rethrow_exception(type_ii_->error);
  return *type_ii_->value;
}

CMatrix gfrft_matrix(const SpectralBasis& gft_basis, double alpha) {
  return fractional_matrix_power(gft_basis, alpha);
}

CMatrix mpgfrft_i_matrix(const SpectralBasis& gft_basis, const RVector& orders) {
  return fractional_matrix_power(gft_basis, orders);
}

cplx mpgfrft_ii_coeff(const GraphTypeIIFactors& factors, const SpectralBasis& gft_basis, Index n, double order,
                      bool derivative) {
  const CMatrix& p = factors.vandermonde.p_matrix;
  cplx c(0.0, 0.0);
  for (Index j = 0; j < gft_basis.size(); ++j) {
    const cplx lam = gft_basis.values(j);
    cplx term = p(n, j) * principal_power(lam, order);
    if (derivative) term *= principal_log(lam);
    c += term;
  }
  return c;
}

CMatrix mpgfrft_ii_matrix(const GraphTypeIIFactors& factors, const SpectralBasis& gft_basis,
                          const RVector& orders) {
  const Index n = gft_basis.size();
  require(orders.size() == n, ErrorCode::ShapeMismatch, "orders length must match graph size");
  CMatrix out = CMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    out += mpgfrft_ii_coeff(factors, gft_basis, k, orders(k)) * factors.gft_powers[static_cast<std::size_t>(k)];
  }
  return out;
}

CMatrix mpgfrft_ii_matrix(const SpectralBasis& gft_basis, const RVector& orders) {
  GraphSpectrum s;
  s.gft = gft_basis.reconstruct();
  s.basis = gft_basis;
  return mpgfrft_ii_matrix(graph_type_ii_factors(s), gft_basis, orders);
}

CMatrix mpdfrft_i_matrix(const SpectralBasis& dft_basis, const RVector& orders) {
  const Index t = dft_basis.size();
  require(orders.size() == t, ErrorCode::ShapeMismatch, "orders length must match DFT size");
  require(static_cast<Index>(dft_basis.phase_index.size()) == t, ErrorCode::InvalidArgument,
          "basis carries no DFT eigenvalue indices");
  CVector d(t);
  for (Index k = 0; k < t; ++k) d(k) = dft_eigenvalue_power(dft_basis.phase_index[static_cast<std::size_t>(k)], orders(k));
  return dft_basis.vectors * d.asDiagonal() * dft_basis.inverse_vectors;
}

cplx mpdfrft_ii_coeff(int t, double order, int steps) {
  require(steps >= 1, ErrorCode::InvalidArgument, "DFT size must be positive");
  const double x = t - steps * order / 4.0;
  const double wrapped = x - steps * std::round(x / steps);
  if (std::abs(wrapped) <= 1e-12) return {1.0, 0.0};
  if (std::abs(x - std::round(x)) <= 1e-12) return {0.0, 0.0};
  const cplx num = 1.0 - std::polar(1.0, 2.0 * kPi * x);
  const cplx den = 1.0 - std::polar(1.0, 2.0 * kPi * x / steps);
  return num / den / static_cast<double>(steps);
}

cplx mpdfrft_ii_coeff_derivative(int t, double order, int steps) {
  require(steps >= 1, ErrorCode::InvalidArgument, "DFT size must be positive");
  const double x = t - steps * order / 4.0;
  cplx acc(0.0, 0.0);
  for (int m = 1; m < steps; ++m) {
    acc += cplx(0.0, -kPi * m / 2.0) * std::polar(1.0, 2.0 * kPi * m * x / steps);
  }
  return acc / static_cast<double>(steps);
}

std::vector<CMatrix> dft_kernel_powers(const SpectralBasis& dft_basis) {
  const Index t = dft_basis.size();
  require(static_cast<Index>(dft_basis.phase_index.size()) == t, ErrorCode::InvalidArgument,
          "basis carries no DFT eigenvalue indices");
  std::vector<CMatrix> powers;
  powers.reserve(static_cast<std::size_t>(t));
  for (Index p = 0; p < t; ++p) {
    CVector d(t);
    for (Index k = 0; k < t; ++k) {
      const long long f = dft_basis.phase_index[static_cast<std::size_t>(k)];
      d(k) = std::polar(1.0, -2.0 * kPi * static_cast<double>((f * p) % t) / static_cast<double>(t));
    }
    powers.push_back(dft_basis.vectors * d.asDiagonal() * dft_basis.inverse_vectors);
  }
  return powers;
}

CMatrix mpdfrft_ii_matrix(const std::vector<CMatrix>& kernel_powers, const RVector& orders) {
  const Index t = static_cast<Index>(kernel_powers.size());
  require(orders.size() == t, ErrorCode::ShapeMismatch, "orders length must match DFT size");
  CMatrix out = CMatrix::Zero(t, t);
  for (Index k = 0; k < t; ++k) {
    out += mpdfrft_ii_coeff(static_cast<int>(k), orders(k), static_cast<int>(t)) *
           kernel_powers[static_cast<std::size_t>(k)];
  }
  return out;
}

CMatrix mpdfrft_ii_matrix(const SpectralBasis& dft_basis, const RVector& orders) {
  return mpdfrft_ii_matrix(dft_kernel_powers(dft_basis), orders);
}

TimeVaryingSignal jfrft_apply(const TimeVaryingSignal& x, const SpectralBasis& gft_basis,
                              const SpectralBasis& dft_basis, double alpha, double beta) {
  require(x.rows() == gft_basis.size() && x.cols() == dft_basis.size(), ErrorCode::ShapeMismatch,
          "signal shape does not match the bases");
  const CMatrix f = gfrft_matrix(gft_basis, alpha);
  const CMatrix d = mpdfrft_i_matrix(dft_basis, RVector::Constant(dft_basis.size(), beta));
  return f * x * d.transpose();
}

CMatrix graph_block(const OrderParams& params, const TransformBases& bases, Index column) {
  const RVector a = params.graph_orders.col(column);
  if (params.g_type == TransformType::I) return mpgfrft_i_matrix(bases.graph().basis, a);
  return mpgfrft_ii_matrix(bases.graph_type_ii(), bases.graph().basis, a);
}

CMatrix time_factor(const OrderParams& params, const TransformBases& bases) {
  if (params.d_type == TransformType::I) return mpdfrft_i_matrix(bases.time(), params.time_orders);
  return mpdfrft_ii_matrix(bases.time_kernel_powers(), params.time_orders);
}

namespace {
void check_dims(const OrderParams& params, const TransformBases& bases) {
  params.validate();
  require(params.n() == bases.n() && params.t() == bases.t(), ErrorCode::ShapeMismatch,
          "order dimensions do not match the transform bases");
}
}  // namespace

TimeVaryingSignal dmpjfrft_apply(const TimeVaryingSignal& x, const OrderParams& params,
                                 const TransformBases& bases) {
  check_dims(params, bases);
  require(x.rows() == params.n() && x.cols() == params.t(), ErrorCode::ShapeMismatch,
          "signal shape does not match the orders");
  CMatrix cols(x.rows(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) cols.col(i) = graph_block(params, bases, i) * x.col(i);
  return cols * time_factor(params, bases).transpose();
}

TimeVaryingSignal JointOperator::apply(const TimeVaryingSignal& x) const {
  require(x.rows() == n && x.cols() == t, ErrorCode::ShapeMismatch, "signal shape does not match operator");
  if (composition == Composition::graph_then_time) {
    CMatrix cols(n, t);
    for (Index i = 0; i < t; ++i) cols.col(i) = blocks[static_cast<std::size_t>(i)] * x.col(i);
    return cols * time_factor.transpose();
  }
  const CMatrix mixed = x * time_factor.transpose();
  CMatrix out(n, t);
  for (Index i = 0; i < t; ++i) out.col(i) = blocks[static_cast<std::size_t>(i)] * mixed.col(i);
  return out;
}

CVector JointOperator::apply(const CVector& x) const { return vec(apply(unvec(x, n, t))); }

CMatrix JointOperator::block_diagonal() const {
  CMatrix blk = CMatrix::Zero(n * t, n * t);
  for (Index i = 0; i < t; ++i) blk.block(i * n, i * n, n, n) = blocks[static_cast<std::size_t>(i)];
  return blk;
}

CMatrix JointOperator::dense() const {
  const CMatrix time_kron = kron(time_factor, CMatrix::Identity(n, n));
  if (composition == Composition::graph_then_time) return time_kron * block_diagonal();
  return block_diagonal() * time_kron;
}

JointOperator dmpjfrft_operator(const OrderParams& params, const TransformBases& bases, bool materialize) {
  check_dims(params, bases);
  JointOperator op;
  op.n = params.n();
  op.t = params.t();
  op.composition = JointOperator::Composition::graph_then_time;
  op.blocks.reserve(static_cast<std::size_t>(op.t));
  for (Index i = 0; i < op.t; ++i) op.blocks.push_back(graph_block(params, bases, i));
  op.time_factor = time_factor(params, bases);
  if (materialize) op.materialize();
  return op;
}

JointOperator dmpjfrft_inverse(const JointOperator& op) {
  JointOperator inv;
  inv.n = op.n;
  inv.t = op.t;
  inv.composition = op.composition == JointOperator::Composition::graph_then_time
                        ? JointOperator::Composition::time_then_graph
                        : JointOperator::Composition::graph_then_time;
  inv.blocks.reserve(op.blocks.size());
  for (const auto& b : op.blocks) inv.blocks.push_back(checked_inverse(b, "graph block"));
  inv.time_factor = checked_inverse(op.time_factor, "time factor");
  if (op.materialized) inv.materialize();
  return inv;
}

JointOperator dmpjfrft_inverse_operator(const OrderParams& params, const TransformBases& bases) {
  check_dims(params, bases);
  JointOperator inv;
  inv.n = params.n();
  inv.t = params.t();
  inv.composition = JointOperator::Composition::time_then_graph;
  inv.blocks.reserve(static_cast<std::size_t>(inv.t));
  for (Index i = 0; i < inv.t; ++i) {
    if (params.g_type == TransformType::I) {
      inv.blocks.push_back(mpgfrft_i_matrix(bases.graph().basis, -params.graph_orders.col(i)));
    } else {
      inv.blocks.push_back(checked_inverse(graph_block(params, bases, i), "graph block"));
    }
  }
  if (params.d_type == TransformType::I) {
    inv.time_factor = mpdfrft_i_matrix(bases.time(), -params.time_orders);
  } else {
    inv.time_factor = checked_inverse(time_factor(params, bases), "time factor");
  }
  return inv;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

}  // namespace dmpj
