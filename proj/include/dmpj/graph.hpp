// Graphs, graph shift operators, k-NN construction and image patch signals.
#pragma once

#include "dmpj/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmpj {

/// Weighted graph stored as a dense adjacency matrix.
///
/// The adjacency must be square, nonnegative and have a zero diagonal; when the
/// graph is undirected it must also be exactly symmetric. Violations throw on
/// construction, so every Graph value in circulation is valid.
class Graph {
 public:
  Graph() = default;
  explicit Graph(RMatrix adjacency, bool directed = false);

  Index n_vertices() const { return adjacency_.rows(); }
  const RMatrix& adjacency() const { return adjacency_; }
  bool directed() const { return directed_; }

  /// Out-degrees (row sums).
  RVector degrees() const { return adjacency_.rowwise().sum(); }

  /// Stable 64-bit FNV-1a fingerprint of (N, directed, adjacency bytes).
  std::uint64_t hash() const;

 private:
  RMatrix adjacency_;
  bool directed_ = false;
};

enum class GsoKind {
  adjacency,
  laplacian,
  normalized_laplacian,
  row_normalized_adjacency,
  symmetric_normalized_adjacency,
};

std::string_view to_string(GsoKind kind);
std::optional<GsoKind> parse_gso_kind(std::string_view name);
std::vector<GsoKind> all_gso_kinds();

/// Shift operator Z for the chosen variant, D = diag(row sums of A).
///
///   adjacency                       A
///   laplacian                       D - A
///   normalized_laplacian            I - D^{-1/2} A D^{-1/2}
///   row_normalized_adjacency        D^{-1} A
///   symmetric_normalized_adjacency  D^{-1/2} A D^{-1/2}
///
/// Normalized variants throw IsolatedVertex if any degree is zero.
RMatrix build_gso(const Graph& graph, GsoKind kind);

/// Undirected unweighted k-nearest-neighbor graph (Euclidean metric, union
/// symmetrization, ties broken by lower index).
///
/// `points` holds one point per row.
Graph knn_graph(const RMatrix& points, int k);
Graph knn_graph(const std::vector<RVector>& points, int k);

/// Pixel coordinates (row, col) of a patch x patch grid in row-major order.
RMatrix grid_coordinates(int patch);

/// Split every frame into non-overlapping patch x patch tiles. Signal p has
/// N = patch^2 rows and one column per frame; column t is the row-major
/// vectorization of tile p of frame t. Tiles are ordered row-major.
std::vector<TimeVaryingSignal> patchify(const std::vector<Image>& frames, int patch);

/// Inverse of patchify. Takes the real part of each signal.
std::vector<Image> unpatchify(const std::vector<TimeVaryingSignal>& signals, int height, int width,
                              int patch, int n_frames);

}  // namespace dmpj
