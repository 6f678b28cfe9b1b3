#include <doctest.h>

#include <cmath>
#include <fstream>

#include "oblique/denoise.hpp"
#include "oblique/graph.hpp"
#include "oblique/matrix_io.hpp"
#include "oblique/random.hpp"

using namespace oblique;

namespace {

const std::string kFixtures = OBLIQUE_FIXTURE_DIR;

SubspaceModel ring8_model() {
  return SubspaceModel::from_bases(read_matrix(kFixtures + "/ring8_w.txt"), read_matrix(kFixtures + "/ring8_z.txt"));
}

}  // namespace

TEST_CASE("static observations") {
  Rng rng(1);
  const auto model = SubspaceModel::from_bases(standard_normal(9, 2, rng), standard_normal(9, 2, rng));
  const auto proj = oblique_projector(model);

  SUBCASE("y is the sum of its parts") {
    const auto obs = generate_static(model, 0.3, 5);
    CHECK((obs.y - (obs.w_true + obs.z_true + obs.v)).norm() == 0.0);
    CHECK((obs.w_true - model.w() * obs.x_w).norm() == 0.0);
  }
  SUBCASE("noise free, no interference") {
    StaticOptions opts;
    opts.zero_interference = true;
    const auto obs = generate_static(model, 0.0, 5, opts);
    CHECK((obs.y - proj.p_w * obs.y).norm() < 1e-12);
  }
  SUBCASE("noise free") {
    const auto obs = generate_static(model, 0.0, 6);
    CHECK((proj.p_u() * obs.y).norm() < 1e-12);
  }
  SUBCASE("deterministic in the seed") {
    const auto a = generate_static(model, 0.5, 42);
    const auto b = generate_static(model, 0.5, 42);
    CHECK(a.y == b.y);
    CHECK_FALSE(a.y == generate_static(model, 0.5, 43).y);
  }
  SUBCASE("negative noise level") { CHECK_THROWS_AS(generate_static(model, -1.0, 0), Error); }
}

TEST_CASE("centralized de-noising") {
  Rng rng(2);
  const auto model = SubspaceModel::from_bases(standard_normal(10, 2, rng), standard_normal(10, 2, rng));
  SUBCASE("exact interference cancellation without noise") {
    const auto obs = generate_static(model, 0.0, 3);
    CHECK((centralized_denoise(obs, model) - obs.w_true).norm() < 1e-10);
  }
  SUBCASE("pure interference is removed") {
    StaticObservation obs;
    obs.y = model.z() * standard_normal(2, rng);
    CHECK(centralized_denoise(obs, model).norm() < 1e-10);
  }
  SUBCASE("matches the least-squares path") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto obs = generate_static(model, 0.7, seed);
      CHECK((centralized_denoise(obs, model) - least_squares_oracle(obs.y, model).w_o).norm() < 1e-10);
    }
  }
}

TEST_CASE("distributed de-noising") {
  SUBCASE("exact projector converges in one step") {
    Rng rng(3);
    const auto model = SubspaceModel::from_bases(standard_normal(6, 2, rng), standard_normal(6, 1, rng));
    const Matrix e = oblique_projector(model).e_wz;
    const auto a = CombinationMatrix::certify(e, e, support_mask(complete_graph(6)));
    const auto obs = generate_static(model, 0.2, 1);
    const auto traj = distributed_denoise(obs, a, 3);
    CHECK((traj.iterates[1] - centralized_denoise(obs, model)).norm() < 1e-12);
  }
  SUBCASE("zero iterations") {
    const auto model = ring8_model();
    const Matrix e = oblique_projector(model).e_wz;
    const auto a = design_combiner(e, support_mask(read_graph(kFixtures + "/ring8.graph")));
    const auto obs = generate_static(model, 0.1, 2);
    const auto traj = distributed_denoise(obs, a, 0);
    CHECK(traj.iterations() == 0);
    CHECK(traj.iterates.size() == 1);
    CHECK(traj.iterates[0] == obs.y);
  }
  SUBCASE("ring of eight, 200 rounds") {
    const auto model = ring8_model();
    const Matrix e = oblique_projector(model).e_wz;
    const auto a = design_combiner(e, support_mask(read_graph(kFixtures + "/ring8.graph")));
    const auto obs = generate_static(model, 0.1, 3);
    const auto traj = distributed_denoise(obs, a, 200);
    const double factor = per_step_factor(a.matrix(), e);
    const double e0 = (obs.y - e * obs.y).norm();
    CHECK((traj.iterates.back() - traj.target).norm() <= std::pow(factor, 200) * e0 + 1e-9);

    // error recursion w~_i = (A - E) w~_{i-1}
    const Matrix diff = a.matrix() - e;
    for (std::size_t i = 1; i < traj.iterates.size(); ++i) {
      const Vector now = traj.target - traj.iterates[i];
      const Vector before = traj.target - traj.iterates[i - 1];
      CHECK((now - diff * before).norm() < 1e-10);
    }
    const auto errs = traj.error_norms();
    const auto bounds = traj.bounds();
    for (std::size_t i = 0; i < errs.size(); ++i) CHECK(errs[i] <= bounds[i] + 1e-9);
  }
}

TEST_CASE("geometric decay rate") {
  const Graph g = random_connected_graph(12, 0.8, 6);
  Rng rng(9);
  const auto model = SubspaceModel::from_bases(standard_normal(12, 2, rng), standard_normal(12, 1, rng));
  const Matrix e = oblique_projector(model).e_wz;
  const auto a = design_combiner(e, support_mask(g));
  const auto obs = generate_static(model, 0.5, 4);
  const auto traj = distributed_denoise(obs, a, 120);
  const auto errs = traj.error_norms();
  // least-squares slope of log error over the tail, above the rounding floor
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 20; i < errs.size(); ++i)
    if (errs[i] > 1e-12) pts.emplace_back(static_cast<double>(i), std::log(errs[i]));
  REQUIRE(pts.size() >= 10);
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  CHECK(sxy / sxx <= std::log(spectral_radius(a.matrix() - e)) + 0.05);
}

TEST_CASE("neighbor-only reads") {
  const Graph g = read_graph(kFixtures + "/ring8.graph");
  const auto model = ring8_model();
  const Matrix e = oblique_projector(model).e_wz;
  const auto a = design_combiner(e, support_mask(g));
  AccessLog log;
  distributed_denoise(generate_static(model, 0.1, 1), a, 5, Execution::Serial, &log);
  CHECK(log.reads.size() > 0);
  for (auto [reader, source] : log.reads) CHECK((reader == source || g.adjacent(reader, source)));
}

TEST_CASE("parallel sweep is bit-identical") {
  const Graph g = random_connected_graph(20, 0.3, 2);
  Rng rng(3);
  const auto model = SubspaceModel::from_bases(standard_normal(20, 2, rng), standard_normal(20, 1, rng));
  const auto a = design_combiner(oblique_projector(model).e_wz, support_mask(g));
  const auto obs = generate_static(model, 0.3, 8);
  const auto serial = distributed_denoise(obs, a, 50, Execution::Serial);
  const auto parallel = distributed_denoise(obs, a, 50, Execution::Parallel);
  for (std::size_t i = 0; i < serial.iterates.size(); ++i) CHECK(serial.iterates[i] == parallel.iterates[i]);
}

TEST_CASE("without interference the recursion is distributed orthogonal projection") {
  const Graph g = random_connected_graph(10, 0.5, 3);
  Rng rng(4);
  const auto model = SubspaceModel::signal_only(standard_normal(10, 2, rng));
  const auto proj = oblique_projector(model);
  const auto a = design_combiner(proj.e_wz, support_mask(g));
  const auto obs = generate_static(model, 0.4, 2);
  const auto traj = distributed_denoise(obs, a, 400);
  CHECK((traj.target - proj.p_w * obs.y).norm() < 1e-12);
  CHECK((traj.iterates.back() - proj.p_w * obs.y).norm() < 1e-8);
}

TEST_CASE("uncertified combiners are refused") {
  const Matrix e = Matrix::Constant(3, 3, 1.0 / 3.0);
  const auto model = SubspaceModel::signal_only(Matrix::Ones(3, 1));
  const auto bad = CombinationMatrix::certify(Matrix::Identity(3, 3), e, support_mask(complete_graph(3)));
  try {
    distributed_denoise(generate_static(model, 0.1, 1), bad, 10);
    FAIL("expected NotCertified");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotCertified);
  }
}

TEST_CASE("trajectory csv") {
  const Matrix e = Matrix::Constant(3, 3, 1.0 / 3.0);
  const auto model = SubspaceModel::signal_only(Matrix::Ones(3, 1));
  const auto a = CombinationMatrix::certify(e, e, support_mask(complete_graph(3)));
  const auto traj = distributed_denoise(generate_static(model, 0.1, 1), a, 2);
  const std::string path = "denoise_test.csv";
  write_denoise_csv(path, traj);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,err_norm,bound");
  int rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(first.rfind("-1,", 0) == 0);
}
