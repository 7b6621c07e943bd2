#include "dmpj/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace dmpj {

Graph::Graph(RMatrix adjacency, bool directed) : adjacency_(std::move(adjacency)), directed_(directed) {
  require(adjacency_.rows() > 0 && adjacency_.rows() == adjacency_.cols(), ErrorCode::ShapeMismatch,
          "adjacency must be a nonempty square matrix");
  require(adjacency_.allFinite(), ErrorCode::InvalidArgument, "adjacency has non-finite entries");
  for (Index i = 0; i < adjacency_.rows(); ++i) {
    require(adjacency_(i, i) == 0.0, ErrorCode::InvalidArgument, "adjacency diagonal must be zero");
    for (Index j = 0; j < adjacency_.cols(); ++j) {
      require(adjacency_(i, j) >= 0.0, ErrorCode::InvalidArgument, "adjacency weights must be nonnegative");
      if (!directed_) {
        require(adjacency_(i, j) == adjacency_(j, i), ErrorCode::InvalidArgument,
                "undirected adjacency must be symmetric");
      }
    }
  }
}

std::uint64_t Graph::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t n = n_vertices();
  const unsigned char dir = directed_ ? 1 : 0;
  mix(&n, sizeof n);
  mix(&dir, 1);
  mix(adjacency_.data(), sizeof(double) * static_cast<std::size_t>(adjacency_.size()));
  return h;
}

std::string_view to_string(GsoKind kind) {
  switch (kind) {
    case GsoKind::adjacency: return "adjacency";
    case GsoKind::laplacian: return "laplacian";
    case GsoKind::normalized_laplacian: return "normalized_laplacian";
    case GsoKind::row_normalized_adjacency: return "row_normalized_adjacency";
    case GsoKind::symmetric_normalized_adjacency: return "symmetric_normalized_adjacency";
  }
  return "unknown";
}

std::optional<GsoKind> parse_gso_kind(std::string_view name) {
  for (GsoKind k : all_gso_kinds()) {
    if (name == to_string(k)) return k;
  }
  // short names used in result tables
  if (name == "adj") return GsoKind::adjacency;
  if (name == "lap") return GsoKind::laplacian;
  if (name == "nor_lap") return GsoKind::normalized_laplacian;
  if (name == "row_nor_adj") return GsoKind::row_normalized_adjacency;
  if (name == "sym_nor_adj") return GsoKind::symmetric_normalized_adjacency;
  return std::nullopt;
}

std::vector<GsoKind> all_gso_kinds() {
  return {GsoKind::adjacency, GsoKind::laplacian, GsoKind::normalized_laplacian,
          GsoKind::row_normalized_adjacency, GsoKind::symmetric_normalized_adjacency};
}

RMatrix build_gso(const Graph& graph, GsoKind kind) {
  const RMatrix& a = graph.adjacency();
  const Index n = graph.n_vertices();
  const RVector deg = graph.degrees();

  const bool normalized = kind == GsoKind::normalized_laplacian || kind == GsoKind::row_normalized_adjacency ||
                          kind == GsoKind::symmetric_normalized_adjacency;
  if (normalized) {
    for (Index i = 0; i < n; ++i) {
      require(deg(i) > 0.0, ErrorCode::IsolatedVertex, "vertex " + std::to_string(i) + " has zero degree");
    }
  }

  switch (kind) {
    case GsoKind::adjacency:
      return a;
    case GsoKind::laplacian: {
      RMatrix z = -a;
      z.diagonal() += deg;
      return z;
    }
    case GsoKind::row_normalized_adjacency:
      return deg.cwiseInverse().asDiagonal() * a;
    case GsoKind::symmetric_normalized_adjacency:
    case GsoKind::normalized_laplacian: {
      const RVector s = deg.cwiseSqrt().cwiseInverse();
      RMatrix z(n, n);
      // elementwise so that symmetry is exact
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) z(i, j) = a(i, j) * (s(i) * s(j));
      }
      if (kind == GsoKind::normalized_laplacian) {
        z = -z;
        z.diagonal().array() += 1.0;
      }
      return z;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown GSO kind");
}

Graph knn_graph(const RMatrix& points, int k) {
  const Index n = points.rows();
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(n >= k + 1, ErrorCode::TooFewPoints,
          "need at least k+1 points, got " + std::to_string(n) + " for k=" + std::to_string(k));
  require(points.cols() >= 1, ErrorCode::DimensionMismatch, "points must have at least one coordinate");

  RMatrix adj = RMatrix::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) dist[static_cast<std::size_t>(j)] = (points.row(i) - points.row(j)).squaredNorm();
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) {
      return dist[static_cast<std::size_t>(p)] < dist[static_cast<std::size_t>(q)];
    });
    int taken = 0;
    for (Index j : order) {
      if (j == i) continue;
      adj(i, j) = 1.0;
      adj(j, i) = 1.0;
      if (++taken == k) break;
    }
  }
  return Graph(std::move(adj), false);
}

Graph knn_graph(const std::vector<RVector>& points, int k) {
  require(!points.empty(), ErrorCode::TooFewPoints, "no points");
  const Index dim = points.front().size();
  RMatrix m(static_cast<Index>(points.size()), dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].size() == dim, ErrorCode::DimensionMismatch, "points have different dimensions");
    m.row(static_cast<Index>(i)) = points[i].transpose();
  }
  return knn_graph(m, k);
}

RMatrix grid_coordinates(int patch) {
  require(patch >= 1, ErrorCode::InvalidArgument, "patch must be positive");
  RMatrix xy(static_cast<Index>(patch) * patch, 2);
  for (int r = 0; r < patch; ++r) {
    for (int c = 0; c < patch; ++c) {
      xy(r * patch + c, 0) = r;
      xy(r * patch + c, 1) = c;
    }
  }
  return xy;
}

std::vector<TimeVaryingSignal> patchify(const std::vector<Image>& frames, int patch) {
  require(patch >= 1, ErrorCode::InvalidArgument, "patch must be positive");
  require(!frames.empty(), ErrorCode::InvalidArgument, "no frames");
  const Index h = frames.front().rows();
  const Index w = frames.front().cols();
  for (const Image& f : frames) {
    require(f.rows() == h && f.cols() == w, ErrorCode::ShapeMismatch, "frames differ in size");
  }
  require(h % patch == 0 && w % patch == 0, ErrorCode::NonDivisibleDimensions,
          "frame " + std::to_string(h) + "x" + std::to_string(w) + " not divisible by patch " +
              std::to_string(patch));

  const Index ph = h / patch;
  const Index pw = w / patch;
  const Index t = static_cast<Index>(frames.size());
  std::vector<TimeVaryingSignal> out;
  out.reserve(static_cast<std::size_t>(ph * pw));
  for (Index pr = 0; pr < ph; ++pr) {
    for (Index pc = 0; pc < pw; ++pc) {
      TimeVaryingSignal s(static_cast<Index>(patch) * patch, t);
      for (Index f = 0; f < t; ++f) {
        const Image& img = frames[static_cast<std::size_t>(f)];
        for (int r = 0; r < patch; ++r) {
          for (int c = 0; c < patch; ++c) {
            s(r * patch + c, f) = img(pr * patch + r, pc * patch + c);
          }
        }
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Image> unpatchify(const std::vector<TimeVaryingSignal>& signals, int height, int width, int patch,
                              int n_frames) {
  require(patch >= 1 && height >= 1 && width >= 1 && n_frames >= 1, ErrorCode::InvalidArgument,
          "sizes must be positive");
  require(height % patch == 0 && width % patch == 0, ErrorCode::NonDivisibleDimensions,
          "frame size not divisible by patch");
  const int ph = height / patch;
  const int pw = width / patch;
  require(static_cast<int>(signals.size()) == ph * pw, ErrorCode::ShapeMismatch,
          "expected " + std::to_string(ph * pw) + " signals, got " + std::to_string(signals.size()));
  for (const auto& s : signals) {
    require(s.rows() == static_cast<Index>(patch) * patch && s.cols() == n_frames, ErrorCode::ShapeMismatch,
            "signal shape does not match patch and frame count");
  }

  std::vector<Image> frames(static_cast<std::size_t>(n_frames), Image::Zero(height, width));
  for (int pr = 0; pr < ph; ++pr) {
    for (int pc = 0; pc < pw; ++pc) {
      const auto& s = signals[static_cast<std::size_t>(pr * pw + pc)];
      for (int f = 0; f < n_frames; ++f) {
        for (int r = 0; r < patch; ++r) {
          for (int c = 0; c < patch; ++c) {
            frames[static_cast<std::size_t>(f)](pr * patch + r, pc * patch + c) = s(r * patch + c, f).real();
          }
        }
      }
    }
  }
  return frames;
}

}  // namespace dmpj
