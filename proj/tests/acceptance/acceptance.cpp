// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "dmpj/experiment.hpp"
#include "dmpj/filtering.hpp"
#include "dmpj/learnnet.hpp"
#include "dmpj/metrics.hpp"
#include "dmpj/transforms.hpp"

#include "../test_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace dmpj;
using testing::oracle_kron;
using testing::oracle_power;

namespace {

constexpr TransformType kI = TransformType::I;
constexpr TransformType kII = TransformType::II;
const std::pair<TransformType, TransformType> kTypes[] = {{kI, kI}, {kI, kII}, {kII, kI}, {kII, kII}};

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Log {
 public:
  void note(const std::string& s) { out_ << (out_.tellp() > 0 ? "; " : "") << s; }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string fmt(const char* f, double v) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string type_name(TransformType g, TransformType d) {
  return std::string(to_string(g)) + "-" + std::string(to_string(d));
}

// Fractional DFT built here from scratch: even/odd eigenvectors of the
// commuting matrix, Hermite indices by descending eigenvalue within a parity,
// and the same index folding as the library (k >= T uses T mod 4).
CMatrix oracle_dfrft(int t, double beta) {
  if (t == 1) return CMatrix::Constant(1, 1, std::polar(1.0, 0.0));
  RMatrix s = RMatrix::Zero(t, t);
  for (int n = 0; n < t; ++n) {
    s(n, n) = 2 * std::cos(2 * std::numbers::pi * n / t) - 4;
    // at T = 2 both neighbours are the same entry and must add up
    s(n, (n + 1) % t) += 1;
    s(n, (n + t - 1) % t) += 1;
  }
  const double r = 1 / std::sqrt(2.0);
  std::vector<RVector> even, odd;
  RVector e0 = RVector::Zero(t);
  e0(0) = 1;
  even.push_back(e0);
  for (int n = 1; 2 * n < t; ++n) {
    RVector p = RVector::Zero(t), q = RVector::Zero(t);
    p(n) = p(t - n) = r;
    q(n) = r;
    q(t - n) = -r;
    even.push_back(p);
    odd.push_back(q);
  }
  if (t % 2 == 0) {
    RVector h = RVector::Zero(t);
    h(t / 2) = 1;
    even.push_back(h);
  }
  CMatrix out = CMatrix::Zero(t, t);
  auto add = [&](const std::vector<RVector>& basis, int first) {
    if (basis.empty()) return;
    RMatrix b(t, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) b.col(j) = basis[j];
    Eigen::SelfAdjointEigenSolver<RMatrix> es(b.transpose() * s * b);
    // ascending from the solver, so walk backwards
    for (Index j = 0; j < b.cols(); ++j) {
      const RVector v = b * es.eigenvectors().col(b.cols() - 1 - j);
      int k = first + 2 * static_cast<int>(j);
      if (k >= t) k = t % 4;
      out += std::polar(1.0, -std::numbers::pi * k * beta / 2) * (v * v.transpose()).cast<cplx>();
    }
  };
  add(even, 0);
  add(odd, 1);
  return out;
}

// ---------------------------------------------------------------------------

Outcome reductions() {
  Outcome o;
  Log log;
  std::mt19937_64 rng(101);
  double worst = 0;
  bool only_t2_type_ii_time = true;
  for (int n : {2, 3, 4, 8}) {
    for (int t : {2, 3, 4, 8}) {
      const TransformBases b = testing::path_bases(n, t);
      const CMatrix& f = b.graph().gft;
      const CMatrix jft = oracle_kron(oracle_dfrft(t, 1.0), f);
      for (auto [g, d] : kTypes) {
        double e_zero = 0, e_uni = 0, e_unit = 0;
        for (int trial = 0; trial < 50; ++trial) {
          const CMatrix x = testing::random_cmatrix(n, t, rng);
          const double alpha = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
          const double beta = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
          const CMatrix jfrft = oracle_kron(oracle_dfrft(t, beta), oracle_power(f, alpha));
          e_zero = std::max(e_zero, relative_error(dmpjfrft_apply(x, OrderParams::uniform(n, t, 0, 0, g, d), b), x));
          e_uni = std::max(e_uni, relative_error(vec(dmpjfrft_apply(x, OrderParams::uniform(n, t, alpha, beta, g, d), b)),
                                                 CVector(jfrft * vec(x))));
          e_unit = std::max(e_unit, relative_error(vec(dmpjfrft_apply(x, OrderParams::uniform(n, t, 1, 1, g, d), b)),
                                                   CVector(jft * vec(x))));
        }
        const double e = std::max({e_zero, e_uni, e_unit});
        if (e > 1e-9) {
          o.pass = false;
          only_t2_type_ii_time = only_t2_type_ii_time && t == 2 && d == kII;
          log.note("N=" + std::to_string(n) + " T=" + std::to_string(t) + " " + type_name(g, d) +
                   fmt(" zero %.1e", e_zero) + fmt(" uniform %.1e", e_uni) + fmt(" unit %.1e", e_unit));
        } else {
          worst = std::max(worst, e);
        }
      }
    }
  }
  o.detail = fmt("worst passing case %.2e", worst) + (o.pass ? "" : "; failing: " + log.str());
  if (!o.pass && only_t2_type_ii_time) {
    o.detail += "; every failure is T=2 with type-II time, where K = D^(4/T) = D^2 = I and the type-II "
                "temporal matrix collapses to a multiple of I";
  }
  return o;
}

Outcome invertibility() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> size(2, 8);
  double round_trip = 0, factor_form = 0, static_form = 0, dynamic_gap = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = size(rng), t = size(rng);
    const TransformBases b = testing::path_bases(n, t);
    OrderParams p;
    p.graph_orders = testing::random_rmatrix(n, t, rng);
    p.time_orders = testing::random_rmatrix(t, 1, rng);
    const JointOperator fwd = dmpjfrft_operator(p, b);
    const CMatrix x = testing::random_cmatrix(n, t, rng);
    round_trip = std::max(round_trip, relative_error(dmpjfrft_inverse_operator(p, b).apply(fwd.apply(x)), x));

    // negated orders, factors composed in reverse: blkdiag(F^{-a_t}) (D^{-b} kron I)
    OrderParams neg = p;
    neg.graph_orders = -p.graph_orders;
    neg.time_orders = -p.time_orders;
    const CMatrix dense_inv = fwd.dense().inverse();
    CMatrix blk = CMatrix::Zero(n * t, n * t);
    for (Index k = 0; k < t; ++k) blk.block(n * k, n * k, n, n) = graph_block(neg, b, k);
    const CMatrix reversed = blk * oracle_kron(time_factor(neg, b), CMatrix::Identity(n, n));
    factor_form = std::max(factor_form, relative_error(reversed, dense_inv));

    // forward-composed F_J(-A, -b) is the inverse when the graph orders are static
    OrderParams st = p;
    st.graph_orders = p.graph_orders.col(0).replicate(1, t);
    OrderParams st_neg = st;
    st_neg.graph_orders = -st.graph_orders;
    st_neg.time_orders = -st.time_orders;
    static_form = std::max(static_form, relative_error(dmpjfrft_operator(st_neg, b).dense(),
                                                       CMatrix(dmpjfrft_operator(st, b).dense().inverse())));
    dynamic_gap = std::max(dynamic_gap, relative_error(dmpjfrft_operator(neg, b).dense(), dense_inv));
  }
  o.pass = round_trip <= 1e-8 && factor_form <= 1e-8 && static_form <= 1e-8;
  o.detail = fmt("round trip %.2e", round_trip) + fmt(", negated-order factors %.2e", factor_form) +
             fmt(", F_J(-A,-b) with static A %.2e", static_form) +
             fmt(" (info: with time-varying A the forward-composed F_J(-A,-b) is off by %.2e)", dynamic_gap);
  return o;
}

Outcome additivity_commutativity() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> size(2, 8);
  double add = 0, comm = 0, worst_cond = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = size(rng), t = size(rng);
    const TransformBases b = testing::path_bases(n, t);
    worst_cond = std::max(worst_cond, b.graph().basis.condition);
    const CMatrix x = testing::random_cmatrix(n, t, rng);

    OrderParams p1, p2;
    p1.graph_orders = testing::random_rmatrix(n, t, rng);
    p1.time_orders = testing::random_rmatrix(t, 1, rng);
    p2.graph_orders = testing::random_rmatrix(n, 1, rng).replicate(1, t);
    p2.time_orders = testing::random_rmatrix(t, 1, rng);
    OrderParams sum = p1;
    sum.graph_orders += p2.graph_orders;
    sum.time_orders += p2.time_orders;
    add = std::max(add, relative_error(dmpjfrft_apply(dmpjfrft_apply(x, p1, b), p2, b), dmpjfrft_apply(x, sum, b)));

    OrderParams q1 = p1;
    q1.graph_orders = testing::random_rmatrix(n, 1, rng).replicate(1, t);
    const CMatrix ab = dmpjfrft_apply(dmpjfrft_apply(x, q1, b), p2, b);
    const CMatrix ba = dmpjfrft_apply(dmpjfrft_apply(x, p2, b), q1, b);
    comm = std::max(comm, relative_error(ab, ba));
  }
  Outcome o;
  o.pass = add <= 1e-8 && comm <= 1e-8 && worst_cond < 1e6;
  o.detail = fmt("additivity %.2e", add) + fmt(", commutativity %.2e", comm) + fmt(", max basis condition %.1f", worst_cond);
  return o;
}

Outcome kron_equivalence() {
  std::mt19937_64 rng(404);
  const TransformBases b = testing::path_bases(4, 4);
  double worst = 0;
  for (auto [g, d] : kTypes) {
    for (int trial = 0; trial < 20; ++trial) {
      OrderParams p;
      p.g_type = g;
      p.d_type = d;
      p.graph_orders = testing::random_rmatrix(4, 4, rng);
      p.time_orders = testing::random_rmatrix(4, 1, rng);
      const CMatrix x = testing::random_cmatrix(4, 4, rng);
      // column form by hand
      CMatrix cols(4, 4);
      for (Index t = 0; t < 4; ++t) cols.col(t) = graph_block(p, b, t) * x.col(t);
      const CMatrix column_form = cols * time_factor(p, b).transpose();
      CMatrix blk = CMatrix::Zero(16, 16);
      for (Index t = 0; t < 4; ++t) blk.block(4 * t, 4 * t, 4, 4) = graph_block(p, b, t);
      const CMatrix kron_form = oracle_kron(time_factor(p, b), CMatrix::Identity(4, 4)) * blk;
      const JointOperator op = dmpjfrft_operator(p, b, true);
      worst = std::max({worst, relative_error(CVector(kron_form * vec(x)), vec(column_form)),
                        relative_error(CVector(*op.materialized * vec(x)), vec(column_form)),
                        relative_error(op.apply(x), column_form), relative_error(dmpjfrft_apply(x, p, b), column_form)});
    }
  }
  return {worst <= 1e-9, fmt("worst relative error %.2e over 80 instances", worst)};
}

Outcome type_ii_reductions() {
  const TransformBases b = testing::path_bases(4, 4);
  double graph = 0, time = 0;
  for (double v : {-1.0, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5}) {
    graph = std::max(graph, relative_error(mpgfrft_ii_matrix(b.graph().basis, RVector::Constant(4, v)),
                                           mpgfrft_i_matrix(b.graph().basis, RVector::Constant(4, v))));
    time = std::max(time, relative_error(mpdfrft_ii_matrix(b.time(), RVector::Constant(4, v)),
                                         mpdfrft_i_matrix(b.time(), RVector::Constant(4, v))));
  }
  // removable singularities: x = t - T a / 4 integer gives 1 on multiples of T, else 0
  double table = 0;
  int entries = 0;
  for (int t = 0; t < 4; ++t) {
    for (int a = -4; a <= 8; ++a) {
      const double x = t - a;
      const double expect = std::fmod(std::fmod(x, 4.0) + 4.0, 4.0) == 0.0 ? 1.0 : 0.0;
      table = std::max(table, std::abs(mpdfrft_ii_coeff(t, a, 4) - expect));
      ++entries;
    }
  }
  Outcome o;
  o.pass = graph <= 1e-7 && time <= 1e-7 && table <= 1e-12;
  o.detail = fmt("graph II vs I %.2e", graph) + fmt(", time II vs I %.2e", time) +
             fmt(", coefficient table max deviation %.1e", table) + " over " + std::to_string(entries) + " entries";
  return o;
}

Outcome gradient_oracle() {
  double worst = 0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(2, 4);
    const int n = size(rng), t = size(rng);
    const TransformBases b = testing::path_bases(n, t);
    const CMatrix x = testing::random_cmatrix(n, t, rng);
    const CMatrix y = x + 0.5 * testing::random_cmatrix(n, t, rng);
    for (auto [g, d] : kTypes) {
      FilterModel m = make_filter_model(n, t, {g, d, false}, 0.0, 1.0);
      m.params.graph_orders = testing::random_rmatrix(n, t, rng, -0.9, 0.9);
      m.params.time_orders = testing::random_rmatrix(t, 1, rng, -0.9, 0.9);
      m.h_diag = testing::random_cmatrix(n * t, 1, rng);
      const RVector analytic = flatten_gradients(gradients(y, x, m, b));

      // central differences on the flat parameter vector, loss from reconstruct + mse_loss only
      const RVector theta = flatten_parameters(m);
      RVector fd(theta.size());
      const double h = 1e-6;
      for (Index k = 0; k < theta.size(); ++k) {
        FilterModel p = m, q = m;
        RVector tp = theta, tq = theta;
        tp(k) += h;
        tq(k) -= h;
        unflatten_parameters(tp, p);
        unflatten_parameters(tq, q);
        fd(k) = (mse_loss(reconstruct(y, p, b), x) - mse_loss(reconstruct(y, q, b), x)) / (2 * h);
      }
      const double e = (analytic - fd).norm() / fd.norm();
      if (e > worst) {
        worst = e;
        where = "seed " + std::to_string(seed) + " " + type_name(g, d);
      }
    }
  }
  return {worst <= 1e-4, fmt("worst relative error %.2e", worst) + " (" + where + ")"};
}

Outcome desk_denoising() {
  Outcome o;
  Log log;
  double in_sum = 0, jf_sum = 0, dm_sum = 0;
  bool dominance = true;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    ExperimentConfig c;
    c.n = 16;
    c.series_length = 6;
    c.segment_length = 6;
    c.input_snr_db = 0.0;
    c.optimizer.epochs = 1000;
    c.optimizer.gamma = 0.01;
    c.seed = static_cast<std::uint64_t>(seed);
    c.transform = TransformChoice::jfrft;
    const ResultRecord jf = run_experiment(c);
    c.transform = TransformChoice::dmpjfrft_i_i;
    const ResultRecord dm = run_experiment(c);
    // both transforms see the same corrupted input
    if (jf.mean_input.snr_db != dm.mean_input.snr_db) o.pass = false;
    in_sum += dm.mean_input.snr_db;
    jf_sum += jf.mean_output.snr_db;
    dm_sum += dm.mean_output.snr_db;
    dominance = dominance && dm.mean_output.snr_db >= jf.mean_output.snr_db - 0.1;
    log.note("seed " + std::to_string(seed) + fmt(" in %.2f", dm.mean_input.snr_db) +
             fmt(" jfrft %.2f", jf.mean_output.snr_db) + fmt(" dmpj %.2f", dm.mean_output.snr_db));
  }
  const double in = in_sum / seeds, jf = jf_sum / seeds, dm = dm_sum / seeds;
  o.pass = o.pass && dm >= in + 3.0 && dominance;
  o.detail = fmt("mean input %.2f dB", in) + fmt(", jfrft %.2f dB", jf) + fmt(", dmpjfrft-I-I %.2f dB", dm) +
             " [" + log.str() + "]";
  return o;
}

Outcome pipeline() {
  Outcome o;
  ExperimentConfig c;
  c.engine = Engine::net;
  c.n = 16;
  c.segment_length = 6;
  c.series_length = 600;  // 100 segments
  c.input_snr_db = 0.0;
  c.seed = 7;
  const ResultRecord r = run_experiment(c);
  const double gain = r.mean_output.snr_db - r.mean_input.snr_db;

  // best-snapshot contract, checked on a directly built dataset
  const SyntheticData data = gen_synthetic(16, 600, SyntheticKind::smooth_graph, 7);
  const auto segs = segment(data.signal, 6);
  std::vector<SamplePair> pairs;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    pairs.push_back({segs[k], degrade(segs[k], Degradation::noise(0.7), 1000 + k)});
  }
  const DatasetSplit split = split_dataset(pairs, {}, 7);
  const TransformBases b(graph_spectrum(data.graph, GsoKind::laplacian), 6);
  TrainConfig tc;
  tc.epochs = 60;
  tc.lr = 0.01;
  const TrainResult tr = train(split, tc, b);
  int argmin = 1;
  for (const auto& e : tr.history) {
    if (e.val_mse < tr.history[argmin - 1].val_mse) argmin = e.epoch;
  }
  TrainConfig replay_cfg = tc;
  replay_cfg.epochs = tr.best_epoch;
  const TrainResult replay = train(split, replay_cfg, b);
  const bool contract = tr.best_epoch == argmin &&
                        evaluate(tr.best, split.val, b).first == tr.history[argmin - 1].val_mse &&
                        flatten_parameters(replay.last) == flatten_parameters(tr.best);
  o.pass = gain >= 2.0 && contract && r.trained.has_value();
  o.detail = std::to_string(r.output_metrics.size()) + " test segments" + fmt(", input %.2f dB", r.mean_input.snr_db) +
             fmt(", output %.2f dB", r.mean_output.snr_db) + fmt(", gain %.2f dB", gain) + ", best epoch " +
             std::to_string(r.best_epoch) + "; snapshot contract " + (contract ? "exact" : "VIOLATED") +
             " (replay best epoch " + std::to_string(tr.best_epoch) + ")";
  return o;
}

Outcome metrics_table() {
  const CMatrix x = CMatrix::Constant(4, 3, cplx(2, -1));
  std::mt19937_64 rng(9);
  const Image a = testing::random_rmatrix(24, 24, rng, 0, 255);
  const Image b = testing::random_rmatrix(24, 24, rng, 0, 255);
  struct Row {
    const char* name;
    double got, want;
  };
  const Row rows[] = {
      {"snr |e|=|x|", snr_db(x, x + x), 0.0},
      {"snr |e|=|x|/10", snr_db(x, x + 0.1 * x), 20.0},
      {"psnr mse=255^2", psnr_from_mse(255.0 * 255.0), 0.0},
      {"psnr mse=1", psnr_from_mse(1.0), 48.1308},
  };
  bool pass = true;
  double worst = 0;
  for (const Row& r : rows) {
    worst = std::max(worst, std::abs(r.got - r.want));
    pass = pass && std::abs(r.got - r.want) <= 1e-3;
  }
  const bool inf_ok = std::isinf(snr_db(x, x)) && std::isinf(psnr_db(a, a));
  const bool ssim_ok = ssim(a, a) == 1.0;
  const bool identity = psnr_db(a, b) == psnr_from_mse(mse(a, b)) &&
                        psnr_from_mse(mse(a, b)) == 10.0 * std::log10(255.0 * 255.0 / mse(a, b));
  return {pass && inf_ok && ssim_ok && identity,
          fmt("table max deviation %.1e dB", worst) + ", infinities " + (inf_ok ? "ok" : "wrong") + ", ssim(a,a)=1 " +
              (ssim_ok ? "ok" : "wrong") + ", psnr-mse identity " + (identity ? "exact" : "broken")};
}

double seconds_per_apply(int n, int t, std::mt19937_64& rng) {
  const TransformBases b = testing::path_bases(n, t);
  OrderParams p;
  p.graph_orders = testing::random_rmatrix(n, t, rng);
  p.time_orders = testing::random_rmatrix(t, 1, rng);
  const CMatrix x = testing::random_cmatrix(n, t, rng);
  std::vector<double> samples;
  for (int rep = 0; rep < 7; ++rep) {
    int iters = 0;
    const auto start = std::chrono::steady_clock::now();
    double elapsed = 0;
    do {
      const JointOperator op = dmpjfrft_operator(p, b);
      volatile double sink = op.apply(x).norm();
      (void)sink;
      ++iters;
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } while (elapsed < 0.05);
    samples.push_back(elapsed / iters);
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

Outcome complexity() {
  std::mt19937_64 rng(10);
  std::vector<double> ln_n, ln_s;
  std::string detail;
  double t64 = 0;
  for (int n : {16, 32, 64}) {
    const double s = seconds_per_apply(n, 8, rng);
    if (n == 64) t64 = s;
    ln_n.push_back(std::log(n));
    ln_s.push_back(std::log(s));
    detail += "N=" + std::to_string(n) + fmt(" %.2e s, ", s);
  }
  const double mx = (ln_n[0] + ln_n[1] + ln_n[2]) / 3, my = (ln_s[0] + ln_s[1] + ln_s[2]) / 3;
  double num = 0, den = 0;
  for (int k = 0; k < 3; ++k) {
    num += (ln_n[k] - mx) * (ln_s[k] - my);
    den += (ln_n[k] - mx) * (ln_n[k] - mx);
  }
  const double slope = num / den;
  return {t64 < 1.0 && slope <= 3.3, detail + fmt("log-log slope %.2f", slope)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"reductions (identity, JFRFT, JFT)", 10, reductions},
      {"invertibility", 5, invertibility},
      {"additivity and commutativity", 5, additivity_commutativity},
      {"Kronecker and column forms agree", 1e9, kron_equivalence},
      {"type-II reductions and coefficient table", 1e9, type_ii_reductions},
      {"analytic vs finite-difference gradients", 30, gradient_oracle},
      {"desk-scale denoising", 300, desk_denoising},
      {"train/validate/test pipeline", 600, pipeline},
      {"metrics table", 1e9, metrics_table},
      {"complexity", 1e9, complexity},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& c = criteria[k];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
