#include "dmpj/learnnet.hpp"

#include "dmpj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dmpj {

DatasetSplit split_dataset(std::vector<SamplePair> pairs, const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  require(n >= 5, ErrorCode::TooFewSamples, "need at least 5 samples to split, got " + std::to_string(n));
  require(ratios.test > 0.0 && ratios.test < 1.0 && ratios.val > 0.0 && ratios.val < 1.0,
          ErrorCode::InvalidArgument, "split ratios must lie in (0, 1)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratios.test * n)));
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratios.val * (n - n_test))));
  require(n_test + n_val < n, ErrorCode::TooFewSamples, "split leaves no training samples");

  DatasetSplit s;
  s.split_seed = seed;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = order[k];
    if (k < n_test) {
      s.test_index.push_back(idx);
      s.test.push_back(std::move(pairs[idx]));
    } else if (k < n_test + n_val) {
      s.val_index.push_back(idx);
      s.val.push_back(std::move(pairs[idx]));
    } else {
      s.train_index.push_back(idx);
      s.train.push_back(std::move(pairs[idx]));
    }
  }
  return s;
}

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), ErrorCode::InvalidArgument, "learning rate must be positive");
  require(epochs >= 0, ErrorCode::InvalidArgument, "epochs must be >= 0");
  require(batch >= 1, ErrorCode::InvalidArgument, "batch size must be >= 1");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          ErrorCode::InvalidArgument, "Adam betas must lie in [0, 1)");
  require(adam_eps > 0.0, ErrorCode::InvalidArgument, "Adam epsilon must be positive");
  require(group_size >= 1, ErrorCode::InvalidArgument, "group size must be >= 1");
}

RVector flatten_parameters(const FilterModel& model) {
  const Index na = model.params.graph_orders.size();
  const Index nb = model.params.time_orders.size();
  const Index nh = model.h_diag.size();
  RVector flat(na + nb + 2 * nh);
  flat.segment(0, na) = Eigen::Map<const RVector>(model.params.graph_orders.data(), na);
  flat.segment(na, nb) = model.params.time_orders;
  flat.segment(na + nb, nh) = model.h_diag.real();
  flat.segment(na + nb + nh, nh) = model.h_diag.imag();
  return flat;
}

RVector flatten_gradients(const GradState& grads) {
  const Index na = grads.grad_A.size();
  const Index nb = grads.grad_b.size();
  const Index nh = grads.grad_h.size();
  RVector flat(na + nb + 2 * nh);
  flat.segment(0, na) = Eigen::Map<const RVector>(grads.grad_A.data(), na);
  flat.segment(na, nb) = grads.grad_b;
  flat.segment(na + nb, nh) = grads.grad_h.real();
  flat.segment(na + nb + nh, nh) = grads.grad_h.imag();
  return flat;
}

void unflatten_parameters(const RVector& flat, FilterModel& model) {
  const Index na = model.params.graph_orders.size();
  const Index nb = model.params.time_orders.size();
  const Index nh = model.h_diag.size();
  require(flat.size() == na + nb + 2 * nh, ErrorCode::ShapeMismatch, "flat parameter length mismatch");
  Eigen::Map<RVector>(model.params.graph_orders.data(), na) = flat.segment(0, na);
  model.params.time_orders = flat.segment(na, nb);
  for (Index j = 0; j < nh; ++j) model.h_diag(j) = cplx(flat(na + nb + j), flat(na + nb + nh + j));
}

void adam_step(FilterModel& model, AdamState& state, const GradState& grads, const TrainConfig& config) {
  const RVector g = flatten_gradients(grads);
  if (state.m.size() != g.size()) {
    state.m = RVector::Zero(g.size());
    state.v = RVector::Zero(g.size());
    state.t = 0;
  }
  ++state.t;
  state.m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * g;
  state.v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.t));
  const RVector m_hat = state.m / c1;
  const RVector v_hat = state.v / c2;
  RVector flat = flatten_parameters(model);
  flat.array() -= config.lr * m_hat.array() / (v_hat.array().sqrt() + config.adam_eps);
  unflatten_parameters(flat, model);
  ++model.step;
}

std::pair<double, double> evaluate(const FilterModel& model, const std::vector<SamplePair>& pairs,
                                   const TransformBases& bases) {
  require(!pairs.empty(), ErrorCode::TooFewSamples, "nothing to evaluate");
  double total_mse = 0.0;
  double total_snr = 0.0;
  for (const auto& p : pairs) {
    const TimeVaryingSignal out = reconstruct(p.corrupted, model, bases);
    total_mse += mse_loss(out, p.clean);
    total_snr += snr_db(p.clean, out);
  }
  const auto count = static_cast<double>(pairs.size());
  return {total_mse / count, total_snr / count};
}

TrainResult train(const DatasetSplit& split, const TrainConfig& config, const TransformBases& bases,
                  const ModelKind& kind) {
  config.validate();
  require(!split.train.empty() && !split.val.empty(), ErrorCode::TooFewSamples,
          "training needs nonempty train and validation sets");

  FilterModel model = make_filter_model(bases.n(), bases.t(), kind, config.init_order, config.init_filter);
  AdamState adam;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best = model;
  result.best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::sort(batch.begin(), batch.end());
      GradState sum;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto& p = split.train[batch[k]];
        const GradState g = gradients(p.corrupted, p.clean, model, bases);
        if (k == 0) {
          sum = g;
        } else {
          sum.grad_A += g.grad_A;
          sum.grad_b += g.grad_b;
          sum.grad_h += g.grad_h;
          sum.loss += g.loss;
        }
      }
      loss_sum += sum.loss;
      const double inv = 1.0 / static_cast<double>(batch.size());
      sum.grad_A *= inv;
      sum.grad_b *= inv;
      sum.grad_h *= inv;
      sum.loss *= inv;
      require(std::isfinite(sum.loss) && flatten_gradients(sum).allFinite(), ErrorCode::DivergedLoss,
              "training loss diverged at epoch " + std::to_string(epoch));
      if (config.optimizer == OptimizerKind::adam) {
        adam_step(model, adam, sum, config);
      } else {
        apply_gradient_step(model, sum, config.lr);
      }
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = loss_sum / static_cast<double>(order.size());
    std::tie(em.val_mse, em.val_snr) = evaluate(model, split.val, bases);
    require(std::isfinite(em.val_mse), ErrorCode::DivergedLoss,
            "validation loss diverged at epoch " + std::to_string(epoch));
    result.history.push_back(em);
    if (em.val_mse < best_val) {
      best_val = em.val_mse;
      result.best = model;
      result.best_epoch = epoch;
    }
  }
  result.last = model;
  return result;
}

TimeVaryingSignal infer(const FilterModel& model, const TimeVaryingSignal& corrupted, const TransformBases& bases) {
  return reconstruct(corrupted, model, bases);
}

}  // namespace dmpj
