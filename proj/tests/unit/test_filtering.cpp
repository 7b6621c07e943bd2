#include "dmpj/filtering.hpp"

#include "../test_util.hpp"

#include <doctest.h>

using namespace dmpj;

namespace {

constexpr TransformType kI = TransformType::I;
constexpr TransformType kII = TransformType::II;

FilterModel random_model(Index n, Index t, const ModelKind& kind, std::mt19937_64& rng) {
  FilterModel m = make_filter_model(n, t, kind, 0.0, 1.0);
  if (!kind.tied_orders) {
    m.params.graph_orders = testing::random_rmatrix(n, t, rng, -0.8, 0.8);
    m.params.time_orders = testing::random_rmatrix(t, 1, rng, -0.8, 0.8);
  } else {
    m.params.graph_orders.setConstant(0.35);
    m.params.time_orders.setConstant(-0.6);
  }
  m.h_diag = testing::random_cmatrix(n * t, 1, rng);
  return m;
}

double loss_of(const FilterModel& m, const CMatrix& y, const CMatrix& x, const TransformBases& b) {
  return mse_loss(reconstruct(y, m, b), x);
}

}  // namespace

TEST_CASE("degradation") {
  std::mt19937_64 rng(1);
  const CMatrix x = testing::random_cmatrix(4, 3, rng);
  CHECK(degrade(x, Degradation::noise(0.0), 5) == x);
  CHECK(degrade(x, Degradation::noise(0.2), 5) == degrade(x, Degradation::noise(0.2), 5));
  CHECK(degrade(x, Degradation::noise(0.2), 5) != degrade(x, Degradation::noise(0.2), 6));
  CHECK_THROWS_AS(Degradation::noise(-1.0).validate(), Error);

  const RMatrix real = testing::random_rmatrix(4, 3, rng);
  CHECK(degrade(real.cast<cplx>(), Degradation::noise(0.5), 3).imag().isZero(0.0));

  const RMatrix k = gaussian_blur_operator(5, 5, 3, 1.0);
  const CMatrix flat = CMatrix::Constant(25, 2, 7.0);
  CHECK((degrade(flat, Degradation::blur(k), 0) - flat).norm() < 1e-12);
  RMatrix bad = k;
  bad(0, 0) += 0.1;
  CHECK_THROWS_AS(Degradation::blur(bad).validate(), Error);
}

TEST_CASE("noise statistics") {
  const CMatrix x = CMatrix::Zero(200, 50);
  const CMatrix y = degrade(x, Degradation::noise(0.5), 42);
  const double var = y.real().array().square().mean();
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
  CHECK(std::abs(y.real().mean()) < 0.02);
}

TEST_CASE("gaussian blur") {
  const RVector g = gaussian_kernel_1d(5, 1.0);
  CHECK(g.sum() == doctest::Approx(1.0));
  CHECK(g(0) == doctest::Approx(g(4)));
  CHECK_THROWS_AS(gaussian_kernel_1d(4, 1.0), Error);

  std::mt19937_64 rng(3);
  const Image img = testing::random_rmatrix(6, 7, rng, 0, 255);
  const RMatrix k = gaussian_blur_operator(6, 7, 5, 1.2);
  // row-major vectorization
  RVector v(42);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 7; ++c) v(r * 7 + c) = img(r, c);
  }
  const RVector bv = k * v;
  const Image bi = gaussian_blur_image(img, 5, 1.2);
  double worst = 0;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 7; ++c) worst = std::max(worst, std::abs(bv(r * 7 + c) - bi(r, c)));
  }
  CHECK(worst < 1e-10);
  CHECK((k.rowwise().sum() - RVector::Ones(42)).norm() < 1e-12);
}

TEST_CASE("graph blur operator") {
  const RMatrix k = graph_blur_operator(testing::path_graph(4), 0.5);
  CHECK((k.rowwise().sum() - RVector::Ones(4)).norm() < 1e-14);
  CHECK(k(0, 0) == doctest::Approx(0.5));
  CHECK(k(0, 1) == doctest::Approx(0.5));
  CHECK(k(1, 0) == doctest::Approx(0.25));
}

TEST_CASE("reconstruct reductions") {
  std::mt19937_64 rng(2);
  const TransformBases b = testing::path_bases(4, 3);
  const CMatrix y = testing::random_cmatrix(4, 3, rng);
  for (TransformType g : {kI, kII}) {
    for (TransformType d : {kI, kII}) {
      FilterModel m = random_model(4, 3, {g, d, false}, rng);
      m.h_diag.setOnes();
      CHECK(relative_error(reconstruct(y, m, b), y) < 1e-8);
      m.h_diag.setZero();
      CHECK(reconstruct(y, m, b).norm() < 1e-12);
    }
  }
  FilterModel z = make_filter_model(4, 3, {}, 0.0, 1.0);
  z.h_diag = testing::random_cmatrix(12, 1, rng);
  const CVector expect = z.h_diag.cwiseProduct(vec(y));
  CHECK(relative_error(vec(reconstruct(y, z, b)), expect) < 1e-10);
}

TEST_CASE("mse loss") {
  const CMatrix x = CMatrix::Zero(2, 3);
  CHECK(mse_loss(x, x) == 0.0);
  CHECK(mse_loss(CMatrix::Ones(2, 3), x) == doctest::Approx(1.0));
  CHECK(mse_loss(CMatrix::Constant(1, 2, cplx(1, 1)), CMatrix::Zero(1, 2)) == doctest::Approx(2.0));
}

TEST_CASE("gradient at the global minimum is zero") {
  std::mt19937_64 rng(3);
  const TransformBases b = testing::path_bases(4, 3);
  const CMatrix x = testing::random_cmatrix(4, 3, rng);
  for (TransformType g : {kI, kII}) {
    for (TransformType d : {kI, kII}) {
      const GradState gs = gradients(x, x, make_filter_model(4, 3, {g, d, false}, 0.0, 1.0), b);
      CHECK(gs.loss < 1e-20);
      CHECK(gs.grad_A.norm() < 1e-10);
      CHECK(gs.grad_b.norm() < 1e-10);
      CHECK(gs.grad_h.norm() < 1e-10);
    }
  }
}

TEST_CASE("closed-form filter gradient at zero orders") {
  std::mt19937_64 rng(4);
  const TransformBases b = testing::path_bases(4, 3);
  const CMatrix x = testing::random_cmatrix(4, 3, rng);
  const CMatrix y = testing::random_cmatrix(4, 3, rng);
  FilterModel m = make_filter_model(4, 3, {}, 0.0, 1.0);
  m.h_diag = testing::random_cmatrix(12, 1, rng);
  const GradState gs = gradients(y, x, m, b);
  const CVector yv = vec(y), xv = vec(x);
  for (Index k = 0; k < 12; ++k) {
    const cplx e = m.h_diag(k) * yv(k) - xv(k);
    const cplx expect = 2.0 * std::conj(yv(k)) * e / 12.0;
    CHECK(std::abs(gs.grad_h(k).real() - 2.0 * (std::conj(yv(k)) * e).real() / 12.0) < 1e-12);
    CHECK(std::abs(gs.grad_h(k) - expect) < 1e-12);
  }
}

TEST_CASE("analytic gradients against a hand-rolled central difference") {
  std::mt19937_64 rng(5);
  const TransformBases b = testing::path_bases(4, 4);
  const CMatrix x = testing::random_cmatrix(4, 4, rng);
  const CMatrix y = x + 0.3 * testing::random_cmatrix(4, 4, rng);
  const double h = 1e-6;
  for (TransformType g : {kI, kII}) {
    for (TransformType d : {kI, kII}) {
      for (bool tied : {false, true}) {
        CAPTURE(to_string(g));
        CAPTURE(to_string(d));
        CAPTURE(tied);
        const FilterModel m = random_model(4, 4, {g, d, tied}, rng);
        const GradState gs = gradients(y, x, m, b);
        CHECK(gs.loss == doctest::Approx(loss_of(m, y, x, b)).epsilon(1e-12));

        auto bump = [&](auto&& edit) {
          FilterModel p = m, q = m;
          edit(p, h);
          edit(q, -h);
          return (loss_of(p, y, x, b) - loss_of(q, y, x, b)) / (2 * h);
        };
        double worst = 0;
        if (tied) {
          const double da = bump([](FilterModel& f, double s) { f.params.graph_orders.array() += s; });
          const double db = bump([](FilterModel& f, double s) { f.params.time_orders.array() += s; });
          worst = std::max({worst, std::abs(da - gs.grad_A(0, 0)), std::abs(db - gs.grad_b(0))});
          CHECK((gs.grad_A.array() - gs.grad_A(0, 0)).abs().maxCoeff() == 0.0);
        } else {
          for (Index i = 0; i < 4; ++i) {
            for (Index t = 0; t < 4; ++t) {
              const double fd = bump([&](FilterModel& f, double s) { f.params.graph_orders(i, t) += s; });
              worst = std::max(worst, std::abs(fd - gs.grad_A(i, t)));
            }
            const double fd = bump([&](FilterModel& f, double s) { f.params.time_orders(i) += s; });
            worst = std::max(worst, std::abs(fd - gs.grad_b(i)));
          }
        }
        for (Index k = 0; k < 16; ++k) {
          const double re = bump([&](FilterModel& f, double s) { f.h_diag(k) += s; });
          const double im = bump([&](FilterModel& f, double s) { f.h_diag(k) += cplx(0, s); });
          worst = std::max(worst, std::abs(cplx(re, im) - gs.grad_h(k)));
        }
        CHECK(worst < 1e-6);
      }
    }
  }
}

TEST_CASE("gd filter on an already clean signal") {
  std::mt19937_64 rng(6);
  const TransformBases b = testing::path_bases(4, 3);
  const CMatrix x = testing::random_cmatrix(4, 3, rng);
  OptimizerConfig cfg;
  cfg.epochs = 100;
  cfg.init_order = 0.0;
  const GdResult r = gd_filter(x, x, cfg, b);
  for (double l : r.loss_trace) CHECK(l < 1e-20);
  CHECK(r.model.h_diag.isApprox(CVector::Ones(12)));

  cfg.init_order = 0.5;
  const GdResult d = gd_filter(x, x, cfg, b);
  CHECK(d.loss_trace.size() == 100u);
  for (std::size_t e = 1; e < d.loss_trace.size(); ++e) CHECK(d.loss_trace[e] <= d.loss_trace[e - 1] + 1e-15);
  CHECK(d.loss_trace.back() < 1e-6);
}

TEST_CASE("gd filter descends and is deterministic") {
  std::mt19937_64 rng(7);
  const TransformBases b = testing::path_bases(8, 4);
  const CMatrix x = testing::random_cmatrix(8, 4, rng);
  const CMatrix y = degrade(x, Degradation::noise(0.5), 9);
  OptimizerConfig cfg;
  cfg.gamma = 1e-3;
  cfg.epochs = 20;
  for (TransformType g : {kI, kII}) {
    for (TransformType d : {kI, kII}) {
      const GdResult r = gd_filter(y, x, cfg, b, {g, d, false});
      for (std::size_t e = 1; e < r.loss_trace.size(); ++e) CHECK(r.loss_trace[e] < r.loss_trace[e - 1]);
      const GdResult again = gd_filter(y, x, cfg, b, {g, d, false});
      CHECK(again.loss_trace == r.loss_trace);
      CHECK(again.model.h_diag == r.model.h_diag);
      CHECK(r.model.step == 20);
    }
  }
}

TEST_CASE("gd filter reports divergence") {
  std::mt19937_64 rng(8);
  const TransformBases b = testing::path_bases(4, 3);
  const CMatrix x = testing::random_cmatrix(4, 3, rng);
  OptimizerConfig cfg;
  cfg.gamma = 1e6;
  cfg.epochs = 200;
  try {
    gd_filter(3.0 * x, x, cfg, b);
    FAIL("expected DivergedLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergedLoss);
  }
}

TEST_CASE("model validation") {
  FilterModel m = make_filter_model(3, 2, {}, 0.5, 1.0);
  CHECK_NOTHROW(m.validate());
  m.h_diag.resize(5);
  CHECK_THROWS_AS(m.validate(), Error);
}
