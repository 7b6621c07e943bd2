// File formats: CSV matrices, PGM images and JSON documents.
#pragma once

#include "dmpj/core.hpp"
#include "dmpj/filtering.hpp"
#include "dmpj/graph.hpp"
#include "dmpj/learnnet.hpp"
#include "dmpj/metrics.hpp"
#include "dmpj/spectral.hpp"
#include "dmpj/transforms.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace dmpj {

using json = nlohmann::json;

// --- complex scalars and CSV -------------------------------------------------

/// Shortest text that parses back to the same double; "inf", "-inf", "nan".
std::string format_real(double value);

/// "a+bi" with round-trip precision, e.g. "1.5-2i", "0+0i".
std::string format_complex(cplx value);

/// Accepts "a", "a+bi", "a-bi", "bi", "i" forms (also with 'j').
cplx parse_complex(const std::string& text);

CMatrix read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const CMatrix& signal);

RMatrix read_real_csv(const std::filesystem::path& path);
void write_real_csv(const std::filesystem::path& path, const RMatrix& m);

Graph read_adjacency_csv(const std::filesystem::path& path, bool directed = false);
void write_adjacency_csv(const std::filesystem::path& path, const Graph& graph);

// --- PGM ---------------------------------------------------------------------

/// Reads binary (P5) or ASCII (P2) 8-bit PGM.
Image read_pgm(const std::filesystem::path& path);

/// Writes 8-bit PGM, rounding and clamping to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& image, bool binary = true);

// --- JSON --------------------------------------------------------------------

/// Nested [[re, im], ...] rows.
json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j);
json vector_to_json(const CVector& v);
CVector vector_from_json(const json& j);

json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig base = {});

json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const json& j, TrainConfig base = {});

json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const json& j);

/// Model checkpoint: orders, h_diag as [re, im] pairs, type tags, graph hash.
json checkpoint_to_json(const FilterModel& model, std::uint64_t graph_hash);
FilterModel checkpoint_from_json(const json& j, std::uint64_t* graph_hash = nullptr);

/// Operator export for cross-implementation comparison.
json operator_to_json(const JointOperator& op);

json to_json(const SpectralBasis& basis);
SpectralBasis spectral_basis_from_json(const json& j);

/// Cache of graph spectra keyed by (GSO kind, graph hash, T).
class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path file);

  static std::string key(GsoKind kind, std::uint64_t graph_hash, int steps);

  /// Loads from disk when present, otherwise computes and stores.
  GraphSpectrum get_or_compute(const Graph& graph, GsoKind kind, int steps);

 private:
  std::filesystem::path file_;
};

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace dmpj
