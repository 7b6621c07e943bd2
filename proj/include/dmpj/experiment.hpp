// Experiment orchestration: synthetic data, segmentation, runs and grids.
#pragma once

#include "dmpj/core.hpp"
#include "dmpj/filtering.hpp"
#include "dmpj/graph.hpp"
#include "dmpj/io.hpp"
#include "dmpj/learnnet.hpp"
#include "dmpj/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmpj {

enum class SyntheticKind { smooth_graph, bandlimited_joint, random };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name);

struct SyntheticData {
  TimeVaryingSignal signal;
  Graph graph;
};

struct SyntheticOptions {
  /// Number of low graph frequencies mixed by smooth_graph (0 = max(1, n / 4)).
  int bandwidth = 0;
  /// Nonzero joint-spectrum coefficients for bandlimited_joint (0 = max(1, nt / 8)).
  int support = 0;
  /// Target RMS amplitude of the signal entries.
  double amplitude = 1.0;
  /// Neighbors per vertex of the random geometric graph.
  int knn = 4;
};

/// Seeded generator over a random geometric k-NN graph.
///
/// smooth_graph: low Laplacian frequencies with sinusoidal time evolution.
/// bandlimited_joint: sparse support in the Laplacian GFT x DFT domain.
/// random: i.i.d. Gaussian entries.
SyntheticData gen_synthetic(int n, int t, SyntheticKind kind, std::uint64_t seed,
                            const SyntheticOptions& options = {});

/// Consecutive column blocks of width `length`; the trailing remainder is dropped.
std::vector<TimeVaryingSignal> segment(const TimeVaryingSignal& series, int length);

enum class Task { denoise, deblur };
enum class Engine { gd, net };
enum class TransformChoice { jfrft, dmpjfrft_i_i, dmpjfrft_i_ii };
enum class DataSource { synthetic, csv_signals, pgm_video };

std::string_view to_string(Task v);
std::string_view to_string(Engine v);
std::string_view to_string(TransformChoice v);
std::string_view to_string(DataSource v);

ModelKind model_kind(TransformChoice choice);

struct ExperimentConfig {
  Task task = Task::denoise;
  Engine engine = Engine::gd;
  GsoKind gso = GsoKind::laplacian;
  TransformChoice transform = TransformChoice::dmpjfrft_i_i;
  DataSource data_source = DataSource::synthetic;

  // synthetic
  int n = 16;
  int series_length = 60;  // total columns before segmentation
  SyntheticKind synthetic_kind = SyntheticKind::smooth_graph;
  SyntheticOptions synthetic;

  // files
  std::filesystem::path signal_path;   // csv_signals: N x L series
  std::filesystem::path graph_path;    // csv_signals: N x N adjacency
  std::vector<std::filesystem::path> frame_paths;  // pgm_video
  int patch = 16;
  int knn = 4;

  int segment_length = 10;
  /// Noise level; ignored when input_snr_db is set.
  double sigma = 0.0;
  /// When set, sigma is chosen per segment to hit this input SNR.
  std::optional<double> input_snr_db;
  double blur_weight = 0.5;  // graph-signal deblurring strength

  OptimizerConfig optimizer;
  TrainConfig train;
  SplitRatios split;
  std::uint64_t seed = 0;

  /// Output directory; empty disables writing.
  std::filesystem::path out_dir;

  void validate() const;
};

json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig base = {});

struct ResultRecord {
  ExperimentConfig config;
  std::vector<MetricReport> input_metrics;
  std::vector<MetricReport> output_metrics;
  MetricReport mean_input;
  MetricReport mean_output;
  double wall_seconds = 0.0;
  std::filesystem::path loss_trace_path;
  /// Per-signal loss traces (gd) or the single training history (net).
  std::vector<std::vector<double>> loss_traces;
  std::vector<EpochMetrics> history;
  /// net engine: best-validation model and the epoch it came from.
  std::optional<FilterModel> trained;
  int best_epoch = 0;
};

json to_json(const ResultRecord& r);

/// Errors from a stage are rethrown with the stage name prepended.
ResultRecord run_experiment(const ExperimentConfig& cfg);

struct CompareGrid {
  std::vector<GsoKind> gsos;
  std::vector<double> sigmas;  // empty together with input_snr_db uses the base config
  std::vector<TransformChoice> transforms;
};

struct CompareRow {
  GsoKind gso;
  double sigma;
  TransformChoice transform;
  double input_snr_db;
  double output_snr_db;
  double first_loss;
};

/// One row per (GSO, sigma, transform), identical corrupted inputs across transforms.
std::vector<CompareRow> compare_transforms(const ExperimentConfig& base, const CompareGrid& grid);

std::string compare_csv(const std::vector<CompareRow>& rows);

}  // namespace dmpj
