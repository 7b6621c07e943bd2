// Degradation models, learnable diagonal spectral filters and gradient descent.
#pragma once

#include "dmpj/core.hpp"
#include "dmpj/graph.hpp"
#include "dmpj/transforms.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dmpj {

/// How the fractional orders are parameterized.
///
/// `tied_orders` collapses A to one scalar alpha and b to one scalar beta,
/// which turns the model into a plain JFRFT filter.
struct ModelKind {
  TransformType g_type = TransformType::I;
  TransformType d_type = TransformType::I;
  bool tied_orders = false;
};

/// Orders plus the diagonal of H, indexed like vec(X) (entry t * N + i).
struct FilterModel {
  OrderParams params;
  CVector h_diag;
  long step = 0;
  bool tied_orders = false;

  Index n() const { return params.n(); }
  Index t() const { return params.t(); }
  void validate() const;
};

FilterModel make_filter_model(Index n, Index t, const ModelKind& kind, double init_order,
                              cplx init_filter);

struct Degradation {
  enum class Kind { additive_noise, blur };

  Kind kind = Kind::additive_noise;
  double sigma = 0.0;
  /// Per-frame blur operator applied to every column; rows sum to one.
  std::optional<RMatrix> kernel;

  static Degradation noise(double sigma);
  static Degradation blur(RMatrix kernel);
  void validate() const;
};

/// Y = X + N (seeded Gaussian, independent real and imaginary parts when X is
/// complex) or Y = K X.
TimeVaryingSignal degrade(const TimeVaryingSignal& x, const Degradation& d, std::uint64_t seed);

/// Normalized 1-D Gaussian taps of odd length `size`.
RVector gaussian_kernel_1d(int size, double sigma);

/// Separable Gaussian blur with replicate padding.
Image gaussian_blur_image(const Image& image, int size, double sigma);

/// The same blur as a (HW x HW) operator on row-major vectorized images.
RMatrix gaussian_blur_operator(int height, int width, int size, double sigma);

/// Graph diffusion blur K = (1 - w) I + w D^{-1} A.
RMatrix graph_blur_operator(const Graph& graph, double weight);

/// vec(X~) = F_J^{-1} H F_J vec(Y).
TimeVaryingSignal reconstruct(const TimeVaryingSignal& y, const FilterModel& model,
                              const TransformBases& bases);

/// (1 / NT) ||X_hat - X||_F^2.
double mse_loss(const TimeVaryingSignal& x_hat, const TimeVaryingSignal& x);

/// Exact gradient of mse_loss(reconstruct(Y), X).
///
/// grad_h holds dL/dRe h + i dL/dIm h. For tied models every entry of grad_A
/// equals dL/dalpha and every entry of grad_b equals dL/dbeta.
struct GradState {
  RMatrix grad_A;
  RVector grad_b;
  CVector grad_h;
  double loss = 0.0;
};

GradState gradients(const TimeVaryingSignal& y, const TimeVaryingSignal& x, const FilterModel& model,
                    const TransformBases& bases);

/// Central finite-difference gradient of the same loss (test oracle).
GradState finite_difference_gradients(const TimeVaryingSignal& y, const TimeVaryingSignal& x,
                                      const FilterModel& model, const TransformBases& bases,
                                      double step = 1e-6);

struct OptimizerConfig {
  double gamma = 0.01;
  int epochs = 1000;
  double init_order = 0.5;
  double init_filter = 1.0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  int blur_kernel_size = 15;
  double blur_sigma = 2.5;
};

struct GdResult {
  FilterModel model;
  /// loss_trace[e] is the loss at the parameters entering epoch e.
  std::vector<double> loss_trace;
};

/// Plain gradient descent on (A, b, H) against the clean reference.
/// Throws DivergedLoss if the loss becomes non-finite.
GdResult gd_filter(const TimeVaryingSignal& y, const TimeVaryingSignal& x, const OptimizerConfig& config,
                   const TransformBases& bases, const ModelKind& kind = {});

GdResult gd_filter(const TimeVaryingSignal& y, const TimeVaryingSignal& x, FilterModel initial,
                   const OptimizerConfig& config, const TransformBases& bases);

/// Moves the model by -rate * grads (plain gradient step).
void apply_gradient_step(FilterModel& model, const GradState& grads, double rate);

}  // namespace dmpj
