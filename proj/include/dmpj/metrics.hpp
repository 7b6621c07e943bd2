// Restoration quality metrics.
#pragma once

#include "dmpj/core.hpp"

#include <limits>
#include <optional>

namespace dmpj {

inline constexpr double kInfinityDb = std::numeric_limits<double>::infinity();

struct MetricReport {
  double mse = 0.0;
  double snr_db = 0.0;
  std::optional<double> psnr_db;
  std::optional<double> ssim;
};

/// Mean of |a - b|^2 over all entries.
double mse(const CMatrix& a, const CMatrix& b);
double mse(const Image& a, const Image& b);

/// 20 log10(||X|| / ||X_hat - X||); +inf for an exact match.
double snr_db(const CMatrix& reference, const CMatrix& estimate);

/// 10 log10(255^2 / MSE); +inf for identical images.
double psnr_db(const Image& reference, const Image& estimate);
double psnr_from_mse(double mse_value);

/// Mean SSIM over the valid region, 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 255. Needs at least 11x11 pixels.
double ssim(const Image& a, const Image& b);

/// Real part clamped to [0, 255].
Image to_image(const CMatrix& m);

MetricReport signal_report(const CMatrix& reference, const CMatrix& estimate);
MetricReport image_report(const Image& reference, const Image& estimate);

}  // namespace dmpj
