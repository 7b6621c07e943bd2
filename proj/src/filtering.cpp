#include "dmpj/filtering.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dmpj {
namespace {

constexpr double kPi = std::numbers::pi;

cplx principal_log(cplx value) {
  require(std::abs(value) >= 1e-14, ErrorCode::NonDifferentiablePoint, "order derivative at a zero eigenvalue");
  double arg = std::arg(value);
  if (arg <= -kPi) arg = kPi;
  return {std::log(std::abs(value)), arg};
}

// diag(V^H G W^H) where V, W are the basis and its inverse; the gradient with
// respect to the k-th eigenvalue factor of V diag(p) W is conj of entry k.
CVector spectral_diag(const SpectralBasis& basis, const CMatrix& g) {
  const CMatrix m = basis.vectors.adjoint() * g * basis.inverse_vectors.adjoint();
  return m.diagonal();
}

// Re <G, M> = Re sum conj(G) .* M.
double frobenius_re(const CMatrix& g, const CMatrix& m) { return (g.conjugate().cwiseProduct(m)).sum().real(); }

struct Forward {
  std::vector<CMatrix> blocks;
  std::vector<CMatrix> inv_blocks;
  CMatrix d;
  CMatrix d_inv;
  CMatrix z1;     // graph-transformed columns
  CMatrix s;      // joint spectrum
  CMatrix s_filt;
  CMatrix z2;     // after the inverse time factor
  CMatrix x_hat;
};

Forward run_forward(const TimeVaryingSignal& y, const FilterModel& model, const TransformBases& bases) {
  model.validate();
  require(model.n() == bases.n() && model.t() == bases.t(), ErrorCode::ShapeMismatch,
          "model dimensions do not match the transform bases");
  require(y.rows() == model.n() && y.cols() == model.t(), ErrorCode::ShapeMismatch,
          "signal shape does not match the model");
  const Index n = model.n();
  const Index t = model.t();
  const JointOperator fwd = dmpjfrft_operator(model.params, bases);
  const JointOperator inv = dmpjfrft_inverse_operator(model.params, bases);
  Forward f;
  f.blocks = fwd.blocks;
  f.inv_blocks = inv.blocks;
  f.d = fwd.time_factor;
  f.d_inv = inv.time_factor;
  f.z1.resize(n, t);
  for (Index i = 0; i < t; ++i) f.z1.col(i) = f.blocks[static_cast<std::size_t>(i)] * y.col(i);
  f.s = f.z1 * f.d.transpose();
  f.s_filt = unvec(model.h_diag, n, t).cwiseProduct(f.s);
  f.z2 = f.s_filt * f.d_inv.transpose();
  f.x_hat.resize(n, t);
  for (Index i = 0; i < t; ++i) f.x_hat.col(i) = f.inv_blocks[static_cast<std::size_t>(i)] * f.z2.col(i);
  return f;
}

}  // namespace

void FilterModel::validate() const {
  params.validate();
  require(h_diag.size() == params.n() * params.t(), ErrorCode::ShapeMismatch, "filter length must be N*T");
  require(h_diag.allFinite(), ErrorCode::InvalidArgument, "filter has non-finite entries");
}

FilterModel make_filter_model(Index n, Index t, const ModelKind& kind, double init_order, cplx init_filter) {
  require(n >= 1 && t >= 1, ErrorCode::InvalidArgument, "model dimensions must be positive");
  FilterModel m;
  m.params = OrderParams::uniform(n, t, init_order, init_order, kind.g_type, kind.d_type);
  m.h_diag = CVector::Constant(n * t, init_filter);
  m.tied_orders = kind.tied_orders;
  return m;
}

Degradation Degradation::noise(double sigma) {
  Degradation d;
  d.kind = Kind::additive_noise;
  d.sigma = sigma;
  d.validate();
  return d;
}

Degradation Degradation::blur(RMatrix kernel) {
  Degradation d;
  d.kind = Kind::blur;
  d.kernel = std::move(kernel);
  d.validate();
  return d;
}

void Degradation::validate() const {
  if (kind == Kind::additive_noise) {
    require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    return;
  }
  require(kernel.has_value() && kernel->rows() == kernel->cols() && kernel->rows() > 0, ErrorCode::ShapeMismatch,
          "blur kernel must be a nonempty square matrix");
  require(kernel->allFinite(), ErrorCode::InvalidArgument, "blur kernel has non-finite entries");
  const RVector sums = kernel->rowwise().sum();
  require((sums.array() - 1.0).abs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument,
          "blur kernel rows must sum to one");
}

TimeVaryingSignal degrade(const TimeVaryingSignal& x, const Degradation& d, std::uint64_t seed) {
  d.validate();
  if (d.kind == Degradation::Kind::blur) {
    require(d.kernel->cols() == x.rows(), ErrorCode::ShapeMismatch, "blur kernel does not match signal rows");
    return d.kernel->cast<cplx>() * x;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool complex_signal = (x.imag().array() != 0.0).any();
  TimeVaryingSignal y = x;
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < y.rows(); ++i) {
      const double re = d.sigma * normal(rng);
      const double im = complex_signal ? d.sigma * normal(rng) : 0.0;
      y(i, j) += cplx(re, im);
    }
  }
  return y;
}

RVector gaussian_kernel_1d(int size, double sigma) {
  require(size >= 1 && size % 2 == 1, ErrorCode::InvalidArgument, "kernel size must be odd and positive");
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::InvalidArgument, "kernel sigma must be positive");
  const int c = size / 2;
  RVector k(size);
  for (int i = 0; i < size; ++i) k(i) = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
  return k / k.sum();
}

Image gaussian_blur_image(const Image& image, int size, double sigma) {
  const RVector k = gaussian_kernel_1d(size, sigma);
  const int c = size / 2;
  const Index h = image.rows();
  const Index w = image.cols();
  require(h >= 1 && w >= 1, ErrorCode::InvalidArgument, "empty image");
  auto clampi = [](Index v, Index hi) { return std::min(std::max(v, Index{0}), hi - 1); };
  Image tmp(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = 0; i < size; ++i) acc += k(i) * image(r, clampi(col + i - c, w));
      tmp(r, col) = acc;
    }
  }
  Image out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = 0; i < size; ++i) acc += k(i) * tmp(clampi(r + i - c, h), col);
      out(r, col) = acc;
    }
  }
  return out;
}

RMatrix gaussian_blur_operator(int height, int width, int size, double sigma) {
  require(height >= 1 && width >= 1, ErrorCode::InvalidArgument, "image size must be positive");
  const RVector k = gaussian_kernel_1d(size, sigma);
  const int c = size / 2;
  auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi - 1); };
  const Index n = static_cast<Index>(height) * width;
  RMatrix op = RMatrix::Zero(n, n);
  for (int r = 0; r < height; ++r) {
    for (int col = 0; col < width; ++col) {
      const Index p = static_cast<Index>(r) * width + col;
      for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
          const Index q = static_cast<Index>(clampi(r + i - c, height)) * width + clampi(col + j - c, width);
          op(p, q) += k(i) * k(j);
        }
      }
    }
  }
  return op;
}

RMatrix graph_blur_operator(const Graph& graph, double weight) {
  require(weight >= 0.0 && weight <= 1.0, ErrorCode::InvalidArgument, "blur weight must lie in [0, 1]");
  RMatrix k = weight * build_gso(graph, GsoKind::row_normalized_adjacency);
  k.diagonal().array() += 1.0 - weight;
  return k;
}

TimeVaryingSignal reconstruct(const TimeVaryingSignal& y, const FilterModel& model, const TransformBases& bases) {
  return run_forward(y, model, bases).x_hat;
}

double mse_loss(const TimeVaryingSignal& x_hat, const TimeVaryingSignal& x) {
  require(x_hat.rows() == x.rows() && x_hat.cols() == x.cols(), ErrorCode::ShapeMismatch,
          "mse operands differ in shape");
  require(x.size() > 0, ErrorCode::InvalidArgument, "empty signal");
  return (x_hat - x).squaredNorm() / static_cast<double>(x.size());
}

GradState gradients(const TimeVaryingSignal& y, const TimeVaryingSignal& x, const FilterModel& model,
                    const TransformBases& bases) {
  const Forward f = run_forward(y, model, bases);
  require(x.rows() == model.n() && x.cols() == model.t(), ErrorCode::ShapeMismatch,
          "reference shape does not match the model");
  const Index n = model.n();
  const Index t = model.t();
  const auto& p = model.params;

  GradState g;
  g.loss = mse_loss(f.x_hat, x);
  g.grad_A = RMatrix::Zero(n, t);
  g.grad_b = RVector::Zero(t);

  // Backward pass; bar quantities are dL/dRe + i dL/dIm.
  const CMatrix bar_xhat = (2.0 / static_cast<double>(n * t)) * (f.x_hat - x);
  CMatrix bar_z2(n, t);
  for (Index i = 0; i < t; ++i) {
    bar_z2.col(i) = f.inv_blocks[static_cast<std::size_t>(i)].adjoint() * bar_xhat.col(i);
  }
  const CMatrix bar_sf = bar_z2 * f.d_inv.conjugate();
  const CMatrix bar_dinv = (f.s_filt.adjoint() * bar_z2).transpose();
  const CMatrix hm = unvec(model.h_diag, n, t);
  g.grad_h = vec(f.s.conjugate().cwiseProduct(bar_sf));
  const CMatrix bar_s = hm.conjugate().cwiseProduct(bar_sf);
  const CMatrix bar_z1 = bar_s * f.d.conjugate();
  const CMatrix bar_d = (f.z1.adjoint() * bar_s).transpose();

  const SpectralBasis& gb = bases.graph().basis;
  for (Index i = 0; i < t; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const CMatrix bar_f = bar_z1.col(i) * y.col(i).adjoint();
    const CMatrix bar_finv = bar_xhat.col(i) * f.z2.col(i).adjoint();
    if (p.g_type == TransformType::I) {
      const CVector mf = spectral_diag(gb, bar_f);
      const CVector mi = spectral_diag(gb, bar_finv);
      for (Index k = 0; k < n; ++k) {
        const cplx lam = gb.values(k);
        const cplx lg = principal_log(lam);
        const cplx dp = principal_power(lam, p.graph_orders(k, i)) * lg;
        const cplx dq = -principal_power(lam, -p.graph_orders(k, i)) * lg;
        g.grad_A(k, i) = (dp * std::conj(mf(k))).real() + (dq * std::conj(mi(k))).real();
      }
    } else {
      const GraphTypeIIFactors& fac = bases.graph_type_ii();
      const CMatrix& inv = f.inv_blocks[ui];
      const CMatrix gamma = bar_f - inv.adjoint() * bar_finv * inv.adjoint();
      for (Index k = 0; k < n; ++k) {
        const cplx dc = mpgfrft_ii_coeff(fac, gb, k, p.graph_orders(k, i), true);
        g.grad_A(k, i) = frobenius_re(gamma, dc * fac.gft_powers[static_cast<std::size_t>(k)]);
      }
    }
  }

  const SpectralBasis& tb = bases.time();
  if (p.d_type == TransformType::I) {
    const CVector mf = spectral_diag(tb, bar_d);
    const CVector mi = spectral_diag(tb, bar_dinv);
    for (Index k = 0; k < t; ++k) {
      const int idx = tb.phase_index[static_cast<std::size_t>(k)];
      const cplx dlog(0.0, -kPi * idx / 2.0);
      const cplx d = dft_eigenvalue_power(idx, p.time_orders(k));
      const cplx dd = dlog * d;
      const cplx ddi = -dlog / d;
      g.grad_b(k) = (dd * std::conj(mf(k))).real() + (ddi * std::conj(mi(k))).real();
    }
  } else {
    const CMatrix gamma = bar_d - f.d_inv.adjoint() * bar_dinv * f.d_inv.adjoint();
    const auto& kp = bases.time_kernel_powers();
    for (Index k = 0; k < t; ++k) {
      const cplx dc = mpdfrft_ii_coeff_derivative(static_cast<int>(k), p.time_orders(k), static_cast<int>(t));
      g.grad_b(k) = frobenius_re(gamma, dc * kp[static_cast<std::size_t>(k)]);
    }
  }

  if (model.tied_orders) {
    g.grad_A.setConstant(g.grad_A.sum());
    g.grad_b.setConstant(g.grad_b.sum());
  }
  return g;
}

GradState finite_difference_gradients(const TimeVaryingSignal& y, const TimeVaryingSignal& x,
                                      const FilterModel& model, const TransformBases& bases, double step) {
  require(step > 0.0, ErrorCode::InvalidArgument, "finite-difference step must be positive");
  auto loss = [&](const FilterModel& m) { return mse_loss(reconstruct(y, m, bases), x); };
  const Index n = model.n();
  const Index t = model.t();
  GradState g;
  g.loss = loss(model);
  g.grad_A = RMatrix::Zero(n, t);
  g.grad_b = RVector::Zero(t);
  g.grad_h = CVector::Zero(n * t);

  auto central = [&](auto&& perturb) {
    FilterModel hi = model;
    FilterModel lo = model;
    perturb(hi, step);
    perturb(lo, -step);
    return (loss(hi) - loss(lo)) / (2.0 * step);
  };

  if (model.tied_orders) {
    g.grad_A.setConstant(central([](FilterModel& m, double e) { m.params.graph_orders.array() += e; }));
    g.grad_b.setConstant(central([](FilterModel& m, double e) { m.params.time_orders.array() += e; }));
  } else {
    for (Index i = 0; i < t; ++i) {
      for (Index k = 0; k < n; ++k) {
        g.grad_A(k, i) = central([=](FilterModel& m, double e) { m.params.graph_orders(k, i) += e; });
      }
      g.grad_b(i) = central([=](FilterModel& m, double e) { m.params.time_orders(i) += e; });
    }
  }
  for (Index j = 0; j < n * t; ++j) {
    const double re = central([=](FilterModel& m, double e) { m.h_diag(j) += cplx(e, 0.0); });
    const double im = central([=](FilterModel& m, double e) { m.h_diag(j) += cplx(0.0, e); });
    g.grad_h(j) = cplx(re, im);
  }
  return g;
}

void apply_gradient_step(FilterModel& model, const GradState& grads, double rate) {
  model.params.graph_orders -= rate * grads.grad_A;
  model.params.time_orders -= rate * grads.grad_b;
  model.h_diag -= rate * grads.grad_h;
  ++model.step;
}

GdResult gd_filter(const TimeVaryingSignal& y, const TimeVaryingSignal& x, FilterModel initial,
                   const OptimizerConfig& config, const TransformBases& bases) {
  require(config.epochs >= 0, ErrorCode::InvalidArgument, "epochs must be >= 0");
  require(config.gamma > 0.0 && std::isfinite(config.gamma), ErrorCode::InvalidArgument,
          "learning rate must be positive");
  GdResult result;
  result.model = std::move(initial);
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
  for (int e = 0; e < config.epochs; ++e) {
    const GradState g = gradients(y, x, result.model, bases);
    require(std::isfinite(g.loss) && g.grad_A.allFinite() && g.grad_b.allFinite() && g.grad_h.allFinite(),
            ErrorCode::DivergedLoss, "loss diverged at epoch " + std::to_string(e));
    result.loss_trace.push_back(g.loss);
    apply_gradient_step(result.model, g, config.gamma);
  }
  return result;
}

GdResult gd_filter(const TimeVaryingSignal& y, const TimeVaryingSignal& x, const OptimizerConfig& config,
                   const TransformBases& bases, const ModelKind& kind) {
  FilterModel m = make_filter_model(y.rows(), y.cols(), kind, config.init_order, config.init_filter);
  return gd_filter(y, x, std::move(m), config, bases);
}

}  // namespace dmpj
