#include "dmpj/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dmpj {

double mse(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::ShapeMismatch, "mse operands differ in shape");
  require(a.size() > 0, ErrorCode::InvalidArgument, "empty operands");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double mse(const Image& a, const Image& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::ShapeMismatch, "mse operands differ in shape");
  require(a.size() > 0, ErrorCode::InvalidArgument, "empty operands");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double snr_db(const CMatrix& reference, const CMatrix& estimate) {
  require(reference.rows() == estimate.rows() && reference.cols() == estimate.cols(), ErrorCode::ShapeMismatch,
          "snr operands differ in shape");
  const double ref = reference.norm();
  require(ref > 0.0, ErrorCode::ZeroReference, "reference signal is zero");
  const double err = (estimate - reference).norm();
  if (err == 0.0) return kInfinityDb;
  return 20.0 * std::log10(ref / err);
}

double psnr_from_mse(double mse_value) {
  require(mse_value >= 0.0, ErrorCode::InvalidArgument, "mse must be nonnegative");
  if (mse_value == 0.0) return kInfinityDb;
  return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

double psnr_db(const Image& reference, const Image& estimate) { return psnr_from_mse(mse(reference, estimate)); }

double ssim(const Image& a, const Image& b) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::ShapeMismatch, "ssim operands differ in shape");
  require(a.rows() >= kWin && a.cols() >= kWin, ErrorCode::TooSmall, "ssim needs at least 11x11 pixels");

  RVector g(kWin);
  for (int i = 0; i < kWin; ++i) g(i) = std::exp(-0.5 * (i - 5) * (i - 5) / (kSigma * kSigma));
  g /= g.sum();
  const RMatrix w = g * g.transpose();

  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Index oh = a.rows() - kWin + 1;
  const Index ow = a.cols() - kWin + 1;
  double total = 0.0;
  for (Index r = 0; r < oh; ++r) {
    for (Index c = 0; c < ow; ++c) {
      const auto pa = a.block(r, c, kWin, kWin).array();
      const auto pb = b.block(r, c, kWin, kWin).array();
      const double mu_a = (w.array() * pa).sum();
      const double mu_b = (w.array() * pb).sum();
      // centered moments, so flat windows give exactly zero variance
      const Eigen::ArrayXXd da = pa - mu_a;
      const Eigen::ArrayXXd db = pb - mu_b;
      const double var_a = (w.array() * da * da).sum();
      const double var_b = (w.array() * db * db).sum();
      const double cov = (w.array() * da * db).sum();
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  return total / static_cast<double>(oh * ow);
}

Image to_image(const CMatrix& m) { return m.real().cwiseMax(0.0).cwiseMin(255.0); }

MetricReport signal_report(const CMatrix& reference, const CMatrix& estimate) {
  MetricReport r;
  r.mse = mse(reference, estimate);
  r.snr_db = snr_db(reference, estimate);
  return r;
}

MetricReport image_report(const Image& reference, const Image& estimate) {
  MetricReport r;
  r.mse = mse(reference, estimate);
  r.snr_db = snr_db(reference.cast<cplx>(), estimate.cast<cplx>());
  r.psnr_db = psnr_from_mse(r.mse);
  if (reference.rows() >= 11 && reference.cols() >= 11) r.ssim = ssim(reference, estimate);
  return r;
}

}  // namespace dmpj
