#include "dmpj/graph.hpp"

#include "../test_util.hpp"

#include <doctest.h>

using namespace dmpj;

namespace {

RMatrix m2(double a, double b, double c, double d) {
  RMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

bool has_edge(const Graph& g, Index i, Index j) { return g.adjacency()(i, j) != 0.0; }

}  // namespace

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(Graph(RMatrix::Zero(2, 3)), Error);
  CHECK_THROWS_AS(Graph(m2(1, 1, 1, 0)), Error);   // nonzero diagonal
  CHECK_THROWS_AS(Graph(m2(0, 1, 2, 0)), Error);   // asymmetric undirected
  CHECK_THROWS_AS(Graph(m2(0, -1, -1, 0)), Error); // negative weight
  CHECK_NOTHROW(Graph(m2(0, 1, 2, 0), true));
}

TEST_CASE("gso on the 2-path") {
  const Graph g(m2(0, 1, 1, 0));
  CHECK(build_gso(g, GsoKind::laplacian) == m2(1, -1, -1, 1));
  CHECK(build_gso(g, GsoKind::adjacency) == m2(0, 1, 1, 0));
}

TEST_CASE("row-normalized star has unit row sums") {
  RMatrix a = RMatrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = a(0, 2) = a(2, 0) = 1.0;
  const RMatrix z = build_gso(Graph(a), GsoKind::row_normalized_adjacency);
  // brute force D^{-1} A
  for (Index i = 0; i < 3; ++i) {
    const double deg = a.row(i).sum();
    for (Index j = 0; j < 3; ++j) CHECK(z(i, j) == doctest::Approx(a(i, j) / deg));
    CHECK(z.row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("gso symmetry and laplacian row sums") {
  std::mt19937_64 rng(3);
  const Graph g = knn_graph(testing::random_rmatrix(12, 2, rng, 0.0, 1.0), 3);
  for (GsoKind k : all_gso_kinds()) {
    const RMatrix z = build_gso(g, k);
    if (k != GsoKind::row_normalized_adjacency) CHECK(z == z.transpose());
  }
  const RMatrix lap = build_gso(g, GsoKind::laplacian);
  CHECK(lap.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("isolated vertex rejected for normalized kinds") {
  const Graph g(RMatrix::Zero(3, 3));
  CHECK_NOTHROW(build_gso(g, GsoKind::laplacian));
  for (GsoKind k : {GsoKind::normalized_laplacian, GsoKind::row_normalized_adjacency,
                    GsoKind::symmetric_normalized_adjacency}) {
    try {
      build_gso(g, k);
      FAIL("expected IsolatedVertex");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IsolatedVertex);
    }
  }
}

TEST_CASE("gso names round trip") {
  for (GsoKind k : all_gso_kinds()) CHECK(parse_gso_kind(to_string(k)) == k);
  CHECK(parse_gso_kind("lap") == GsoKind::laplacian);
  CHECK_FALSE(parse_gso_kind("nope").has_value());
}

TEST_CASE("knn on a line") {
  RMatrix pts(3, 1);
  pts << 0, 1, 3;
  const Graph g = knn_graph(pts, 1);
  CHECK(has_edge(g, 0, 1));
  CHECK(has_edge(g, 1, 2));
  CHECK_FALSE(has_edge(g, 0, 2));
}

TEST_CASE("knn on two points and the unit square") {
  RMatrix two(2, 1);
  two << 0, 5;
  CHECK(knn_graph(two, 1).adjacency().sum() == 2.0);

  RMatrix sq(4, 2);
  sq << 0, 0, 1, 0, 1, 1, 0, 1;
  const Graph g = knn_graph(sq, 2);
  for (Index i = 0; i < 4; ++i) {
    CHECK(has_edge(g, i, (i + 1) % 4));
    CHECK_FALSE(has_edge(g, i, (i + 2) % 4));
  }
}

TEST_CASE("knn ties go to the lower index") {
  // vertex 1 is equidistant from 0 and 2
  RMatrix pts(3, 1);
  pts << 0, 1, 2;
  const Graph g = knn_graph(pts, 1);
  CHECK(has_edge(g, 1, 0));
  CHECK(has_edge(g, 2, 1));
  CHECK(g.adjacency() == g.adjacency().transpose());
  CHECK(g.adjacency().diagonal().isZero());
}

TEST_CASE("knn errors") {
  CHECK_THROWS_AS(knn_graph(RMatrix::Zero(2, 2), 2), Error);
  std::vector<RVector> pts{RVector::Zero(2), RVector::Zero(3), RVector::Zero(2)};
  try {
    knn_graph(pts, 1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("patchify shapes") {
  std::vector<Image> big(3, Image::Zero(512, 512));
  const auto sig = patchify(big, 16);
  CHECK(sig.size() == 1024);
  CHECK(sig.front().rows() == 256);
  CHECK(sig.front().cols() == 3);

  CHECK(patchify({Image::Zero(16, 16)}, 16).front().cols() == 1);

  const auto zeros = patchify(std::vector<Image>(2, Image::Zero(4, 4)), 2);
  CHECK(zeros.size() == 4);
  for (const auto& s : zeros) CHECK(s.isZero(0.0));

  CHECK_THROWS_AS(patchify({Image::Zero(5, 4)}, 2), Error);
}

TEST_CASE("patch layout by hand") {
  Image f(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) f(r, c) = 10 * r + c;
  }
  const auto s = patchify({f}, 2);
  // patch 1 is the top-right tile: pixels (0,2) (0,3) (1,2) (1,3)
  CHECK(s[1](0, 0).real() == 2);
  CHECK(s[1](1, 0).real() == 3);
  CHECK(s[1](2, 0).real() == 12);
  CHECK(s[1](3, 0).real() == 13);
  CHECK(s[2](0, 0).real() == 20);
  CHECK(unpatchify(s, 4, 4, 2, 1).front() == f);
}

TEST_CASE("unpatchify round trip and errors") {
  std::mt19937_64 rng(9);
  std::vector<Image> frames;
  for (int k = 0; k < 3; ++k) frames.push_back(testing::random_rmatrix(8, 12, rng, 0, 255));
  const auto back = unpatchify(patchify(frames, 4), 8, 12, 4, 3);
  for (int k = 0; k < 3; ++k) CHECK(back[k] == frames[k]);

  auto sig = patchify(frames, 4);
  sig.pop_back();
  try {
    unpatchify(sig, 8, 12, 4, 3);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("grid coordinates and hash") {
  const RMatrix xy = grid_coordinates(3);
  CHECK(xy.rows() == 9);
  CHECK(xy(5, 0) == 1);
  CHECK(xy(5, 1) == 2);
  const Graph g = knn_graph(xy, 4);
  CHECK(g.hash() == knn_graph(grid_coordinates(3), 4).hash());
  CHECK(g.hash() != testing::path_graph(9).hash());
}
