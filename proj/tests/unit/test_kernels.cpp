#include <doctest.h>

#include "oblique/graph.hpp"
#include "oblique/kernels.hpp"
#include "oblique/random.hpp"

using namespace oblique;

TEST_CASE("neighbor operator reproduces the masked product") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const Index nodes = 10 + static_cast<Index>(seed);
    const std::vector<Index> dims(static_cast<std::size_t>(nodes), 1 + static_cast<Index>(seed % 3));
    const SupportMask mask = block_expand(support_mask(random_connected_graph(nodes, 0.3, seed)), dims);
    const Matrix a = mask.apply(standard_normal(mask.dim(), mask.dim(), rng));
    const NeighborOperator op(a, mask);
    CHECK(op.dense() == a);
    const Vector x = standard_normal(mask.dim(), rng);
    Vector serial;
    Vector parallel;
    op.apply_serial(x, serial);
    op.apply_parallel(x, parallel);
    CAPTURE(seed);
    CHECK((serial - a * x).norm() < 1e-12 * (1.0 + x.norm()));
    CHECK(serial == parallel);
  }
}

TEST_CASE("entries outside the mask are ignored") {
  const SupportMask mask = support_mask(path_graph(3));
  const NeighborOperator op(Matrix::Ones(3, 3), mask);
  Vector out;
  op.apply_serial(Vector::Ones(3), out);
  CHECK(out(0) == 2.0);
  CHECK(out(1) == 3.0);
  CHECK(out(2) == 2.0);
}

TEST_CASE("sources and access log") {
  const Graph g = ring_graph(6);
  const SupportMask mask = block_expand(support_mask(g), std::vector<Index>(6, 2));
  const NeighborOperator op(Matrix::Identity(12, 12), mask);
  CHECK(op.node_count() == 6);
  CHECK(op.sources(0) == std::vector<Index>{0, 1, 5});
  AccessLog log;
  Vector out;
  op.apply_serial(Vector::Ones(12), out, &log);
  CHECK(log.reads.size() == 18);
  for (auto [reader, source] : log.reads) CHECK((reader == source || g.adjacent(reader, source)));
}

TEST_CASE("size checks") {
  const SupportMask mask = support_mask(path_graph(3));
  CHECK_THROWS_AS(NeighborOperator(Matrix::Zero(4, 4), mask), Error);
  const NeighborOperator op(Matrix::Identity(3, 3), mask);
  Vector out;
  CHECK_THROWS_AS(op.apply_serial(Vector::Zero(2), out), Error);
}
