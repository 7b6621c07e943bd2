// Train / validate / test pipeline for a shared transform + diagonal filter layer.
#pragma once

#include "dmpj/core.hpp"
#include "dmpj/filtering.hpp"
#include "dmpj/transforms.hpp"

#include <cstdint>
#include <vector>

namespace dmpj {

struct SamplePair {
  TimeVaryingSignal clean;
  TimeVaryingSignal corrupted;
};

struct SplitRatios {
  double test = 0.2;
  /// Fraction of the non-test remainder used for validation.
  double val = 0.2;
};

struct DatasetSplit {
  std::vector<SamplePair> train;
  std::vector<SamplePair> val;
  std::vector<SamplePair> test;
  /// Original dataset index of every member, same order as above.
  std::vector<std::size_t> train_index, val_index, test_index;
  std::uint64_t split_seed = 0;
};

/// Seeded shuffle, then test = round(test * n), val = round(val * (n - test)),
/// train = remainder. Every part gets at least one sample. Needs n >= 5.
DatasetSplit split_dataset(std::vector<SamplePair> pairs, const SplitRatios& ratios, std::uint64_t seed);

enum class OptimizerKind { adam, plain_gd };

struct TrainConfig {
  double lr = 0.001;
  int epochs = 200;
  int batch = 16;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Recorded only; the training loop does not use it.
  int group_size = 1;
  double init_order = 0.5;
  double init_filter = 1.0;
  bool shuffle = true;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const;
};

/// Adam moments over the flattened parameter vector (A | b | Re h | Im h).
struct AdamState {
  RVector m;
  RVector v;
  long t = 0;
};

RVector flatten_parameters(const FilterModel& model);
RVector flatten_gradients(const GradState& grads);
void unflatten_parameters(const RVector& flat, FilterModel& model);

void adam_step(FilterModel& model, AdamState& state, const GradState& grads, const TrainConfig& config);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_snr = 0.0;
};

struct TrainResult {
  FilterModel best;
  FilterModel last;
  int best_epoch = 0;
  std::vector<EpochMetrics> history;
};

/// Mean MSE and mean SNR (dB) of a model over a set of pairs.
std::pair<double, double> evaluate(const FilterModel& model, const std::vector<SamplePair>& pairs,
                                   const TransformBases& bases);

/// One shared model over all samples; batch gradient is the mean of per-sample
/// gradients in ascending sample order. Returns the snapshot with the lowest
/// validation MSE (earliest on ties).
TrainResult train(const DatasetSplit& split, const TrainConfig& config, const TransformBases& bases,
                  const ModelKind& kind = {});

/// Reconstruction with frozen parameters; no reference signal involved.
TimeVaryingSignal infer(const FilterModel& model, const TimeVaryingSignal& corrupted,
                        const TransformBases& bases);

}  // namespace dmpj
