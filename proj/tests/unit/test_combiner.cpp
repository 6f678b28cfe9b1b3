#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "oblique/combiner.hpp"
#include "oblique/graph.hpp"
#include "oblique/matrix_io.hpp"
#include "oblique/projector.hpp"
#include "oblique/random.hpp"

using namespace oblique;

namespace {

const std::string kFixtures = OBLIQUE_FIXTURE_DIR;

std::map<std::string, double> read_reference(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    out[line.substr(0, eq - 1)] = std::stod(line.substr(eq + 1));
  }
  return out;
}

struct Fixture {
  Graph graph;
  SubspaceModel model;
  ObliqueProjector proj;
  std::map<std::string, double> reference;
};

Fixture load_fixture(const std::string& name) {
  Graph g = read_graph(kFixtures + "/" + name + ".graph");
  auto model = SubspaceModel::from_bases(read_matrix(kFixtures + "/" + name + "_w.txt"),
                                         read_matrix(kFixtures + "/" + name + "_z.txt"));
  auto proj = oblique_projector(model);
  return {std::move(g), std::move(model), std::move(proj), read_reference(kFixtures + "/" + name + "_reference.txt")};
}

// Top singular value by power iteration on M^T M.
double power_iteration_norm(const Matrix& m) {
  Vector v = Vector::Ones(m.cols()).normalized();
  double s = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Vector next = m.transpose() * (m * v);
    const double len = next.norm();
    if (len == 0.0) return 0.0;
    next /= len;
    const double change = (next - v).norm();
    v = next;
    s = std::sqrt(len);
    if (change < 1e-15) break;
  }
  return s;
}

// Minimum-norm correction of a0 onto the stacked system
// [E^T (x) I; I (x) E] vec(A) = [vec E; vec E] restricted to free entries.
Matrix stacked_projection_oracle(const Matrix& a0, const Matrix& e, const SupportMask& mask) {
  const Index n = e.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix g(2 * n * n, n * n);
  g << Eigen::kroneckerProduct(e.transpose(), id), Eigen::kroneckerProduct(id, e);
  Vector b(2 * n * n);
  b << e.reshaped(), e.reshaped();
  std::vector<Index> free;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (mask.allowed(i, j)) free.push_back(j * n + i);
  Matrix gf(g.rows(), static_cast<Index>(free.size()));
  Vector x0(static_cast<Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) {
    gf.col(static_cast<Index>(c)) = g.col(free[c]);
    x0(static_cast<Index>(c)) = a0.reshaped()(free[c]);
  }
  const Vector x = x0 + gf.completeOrthogonalDecomposition().solve(b - gf * x0);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t c = 0; c < free.size(); ++c) out.reshaped()(free[c]) = x(static_cast<Index>(c));
  return out;
}

SubspaceModel random_model(Index n, Index p, Index l, Rng& rng) {
  return SubspaceModel::from_bases(standard_normal(n, p, rng), standard_normal(n, l, rng));
}

}  // namespace

TEST_CASE("per-step factor") {
  Rng rng(4);
  const Matrix e = standard_normal(5, 5, rng);
  CHECK(per_step_factor(e, e) == 0.0);

  const Vector u = standard_normal(5, rng).normalized();
  const Vector v = standard_normal(5, rng).normalized();
  CHECK(per_step_factor(e + 0.37 * u * v.transpose(), e) == doctest::Approx(0.37).epsilon(1e-12));

  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = standard_normal(5, 5, rng);
    const Matrix b = standard_normal(5, 5, rng);
    CHECK(std::abs(per_step_factor(a, b) - power_iteration_norm(a - b)) < 1e-8);
  }
  CHECK_THROWS_AS(per_step_factor(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), Error);
}

TEST_CASE("spectral radius") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 0.5, -0.9;
  CHECK(spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-12));
  Matrix nil = Matrix::Zero(4, 4);
  nil.triangularView<Eigen::StrictlyUpper>().setOnes();
  CHECK(spectral_radius(nil) < 1e-8);
  Matrix rot(2, 2);
  rot << 0, -2, 2, 0;
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));
}

TEST_CASE("check_conditions") {
  Rng rng(12);
  const auto model = random_model(6, 2, 1, rng);
  const auto proj = oblique_projector(model);
  const SupportMask full = support_mask(complete_graph(6));

  SUBCASE("A = E") {
    const DesignReport r = check_conditions(proj.e_wz, proj.e_wz, full, 1e-9, &model.w());
    CHECK(r.valid);
    CHECK(r.passed);
    CHECK(r.residual_left < 1e-12);
    CHECK(r.residual_right < 1e-12);
    CHECK(r.rho < 1e-8);
    REQUIRE(r.right_eigvec_residual.has_value());
    CHECK(*r.right_eigvec_residual < 1e-12);
    CHECK(*r.left_eigvec_residual < 1e-12);
  }
  SUBCASE("A = I fails the spectral condition") {
    const DesignReport r = check_conditions(Matrix::Identity(6, 6), proj.e_wz, full, 1e-9);
    CHECK(r.residual_left < 1e-12);
    CHECK(r.residual_right < 1e-12);
    CHECK(r.rho >= 1.0 - 1e-12);
    CHECK_FALSE(r.passed);
  }
  SUBCASE("mask violations are counted") {
    const DesignReport r = check_conditions(proj.e_wz, proj.e_wz, support_mask(ring_graph(6)), 1e-9);
    CHECK(r.mask_violations > 0);
    CHECK_FALSE(r.passed);
  }
  SUBCASE("size mismatch does not throw") {
    const DesignReport r = check_conditions(Matrix::Identity(3, 3), proj.e_wz, full, 1e-9);
    CHECK_FALSE(r.valid);
    CHECK_FALSE(r.passed);
  }
}

TEST_CASE("certification gate") {
  const SupportMask full = support_mask(complete_graph(3));
  const Matrix e = Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK(CombinationMatrix::certify(e, e, full).certified());
  const auto bad = CombinationMatrix::certify(Matrix::Identity(3, 3), e, full);
  CHECK_FALSE(bad.certified());
  try {
    bad.require_certified("A");
    FAIL("expected NotCertified");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotCertified);
  }
}

TEST_CASE("affine projection") {
  Rng rng(31);
  const auto model = random_model(6, 1, 1, rng);
  const Matrix e = oblique_projector(model).e_wz;

  SUBCASE("complete graph, A0 = 0, matches the stacked minimum-norm solution") {
    const SupportMask full = support_mask(complete_graph(6));
    const Matrix a = project_affine(Matrix::Zero(6, 6), e, full);
    CHECK((a - stacked_projection_oracle(Matrix::Zero(6, 6), e, full)).norm() < 1e-10);
    CHECK((a * e - e).norm() < 1e-10);
    CHECK((e * a - e).norm() < 1e-10);
  }
  SUBCASE("sparse mask, random A0, matches the oracle") {
    const SupportMask mask = support_mask(random_connected_graph(6, 0.6, 3));
    const Matrix a0 = standard_normal(6, 6, rng);
    const Matrix a = project_affine(a0, e, mask);
    CHECK((a - stacked_projection_oracle(a0, e, mask)).norm() < 1e-9);
    CHECK(mask.violations(a) == 0);
  }
  SUBCASE("feasible input is unchanged") {
    const SupportMask full = support_mask(complete_graph(6));
    const Matrix a0 = 0.5 * Matrix::Identity(6, 6) + 0.5 * e;
    CHECK((project_affine(a0, e, full) - a0).norm() < 1e-10);
  }
  SUBCASE("forbidden entries end at exactly zero") {
    const SupportMask path = support_mask(path_graph(6));
    const Matrix e_path = oblique_projector(SubspaceModel::signal_only(Matrix::Ones(6, 1))).e_wz;
    Matrix a0 = Matrix::Identity(6, 6);
    a0(0, 5) = 1.0;
    const Matrix a = project_affine(a0, e_path, path);
    CHECK(a(0, 5) == 0.0);
    CHECK(path.violations(a) == 0);
    CHECK((a * e_path - e_path).norm() < 1e-10);
  }
}

TEST_CASE("design on a complete graph returns E") {
  Rng rng(8);
  const auto model = random_model(5, 2, 1, rng);
  const Matrix e = oblique_projector(model).e_wz;
  const auto a = design_combiner(e, support_mask(complete_graph(5)));
  CHECK(a.certified());
  CHECK(a.report().objective < 1e-6);
  CHECK((a.matrix() - e).norm() < 1e-5);
}

TEST_CASE("consensus special case") {
  const Matrix w = Matrix::Constant(3, 1, 1.0 / std::sqrt(3.0));
  const Matrix e = oblique_projector(SubspaceModel::signal_only(w)).e_wz;
  const auto a = design_combiner(e, support_mask(complete_graph(3)));
  CHECK((a.matrix() - Matrix::Constant(3, 3, 1.0 / 3.0)).norm() < 1e-6);
}

TEST_CASE("design matches the offline convex reference") {
  SUBCASE("ring of eight") {
    const Fixture fx = load_fixture("ring8");
    const auto a = design_combiner(fx.proj.e_wz, support_mask(fx.graph));
    CHECK(a.certified());
    CHECK(std::abs(a.report().objective - fx.reference.at("oblique_objective")) < 1e-3);
    // the reference optimum for P_D is 1, so no margin is achievable
    CHECK(fx.reference.at("orthogonal_objective") > 1.0 - 1e-3);
    CHECK_THROWS_AS(design_combiner(fx.proj.p_d, support_mask(fx.graph)), Error);
  }
  SUBCASE("random ten-node graph") {
    const Fixture fx = load_fixture("dense10");
    const auto a = design_combiner(fx.proj.e_wz, support_mask(fx.graph));
    const auto c = design_combiner(fx.proj.p_d, support_mask(fx.graph));
    CHECK(std::abs(a.report().objective - fx.reference.at("oblique_objective")) < 1e-3);
    CHECK(std::abs(c.report().objective - fx.reference.at("orthogonal_objective")) < 1e-3);
    // the convex optimum is a lower bound up to solver tolerance
    CHECK(a.report().objective > fx.reference.at("oblique_objective") - 1e-6);
  }
}

TEST_CASE("subgradient method reaches a certified design") {
  const Fixture fx = load_fixture("dense10");
  DesignOptions opts;
  opts.method = DesignMethod::Subgradient;
  const auto a = design_combiner(fx.proj.e_wz, support_mask(fx.graph), 0.001, opts);
  CHECK(a.certified());
  CHECK(a.report().method.find("subgradient") != std::string::npos);
  CHECK(a.report().objective < 1.0 - 0.001);
  // projected subgradient converges slowly; within 1e-2 of the optimum
  CHECK(std::abs(a.report().objective - fx.reference.at("oblique_objective")) < 1e-2);
}

TEST_CASE("designed combiners satisfy the lemma conditions") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    const Index n = 6 + static_cast<Index>(seed);
    const Graph g = random_connected_graph(n, 0.6, seed);
    const auto model = random_model(n, 1, 1, rng);
    const auto proj = oblique_projector(model);
    const SupportMask mask = support_mask(g);
    CAPTURE(seed);
    CombinationMatrix a = [&] {
      try {
        return design_combiner(proj.e_wz, mask);
      } catch (const Error& e) {
        FAIL("design failed: " << e.what());
        throw;
      }
    }();
    const Matrix& m = a.matrix();
    const Matrix& e = proj.e_wz;
    CHECK((m * e - e).norm() < 1e-6);
    CHECK((e * m - e).norm() < 1e-6);
    CHECK(mask.violations(m) == 0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (!mask.allowed(i, j)) CHECK(m(i, j) == 0.0);

    const double s = a.report().objective;
    CHECK(s <= 1.0 - 0.001 + 1e-6);
    const double rho = spectral_radius(m - e);
    CHECK(rho < 1.0);
    CHECK(rho <= s + 1e-8);

    // powers converge: A^i - E = (A - E)^i
    Matrix power = Matrix::Identity(n, n);
    for (int i = 1; i <= 50; ++i) {
      power = power * m;
      if (i % 10 == 0) CHECK(spectral_norm(power - e) <= std::pow(s, i) + 1e-12);
    }
    if (s <= 0.8) CHECK(spectral_norm(power - e) < 1e-6);

    // eigenvalue one with multiplicity P
    Eigen::EigenSolver<Matrix> es(m);
    int ones = 0;
    for (Index i = 0; i < n; ++i) ones += std::abs(es.eigenvalues()(i) - 1.0) < 1e-6 ? 1 : 0;
    CHECK(ones == model.signal_rank());

    // Schur complement of [[sI, X], [X^T, sI]] is PSD iff s >= ||X||
    CHECK(spectral_norm_lmi_min_eigenvalue(m, e, s + 1e-9) >= -1e-12);
    CHECK(spectral_norm_lmi_min_eigenvalue(m, e, s * 0.99) < 0.0);
  }
}

TEST_CASE("kronecker shortcut") {
  Rng rng(40);
  const Graph g = random_connected_graph(7, 0.9, 2);
  const auto small = SubspaceModel::from_bases(standard_normal(7, 1, rng), standard_normal(7, 1, rng));
  const auto big = SubspaceModel::from_bases(kron_expand(small.w(), 3), kron_expand(small.z(), 3));
  const Matrix e = oblique_projector(big).e_wz;
  const SupportMask mask = block_expand(support_mask(g), std::vector<Index>(7, 3));
  const auto a = design_combiner(e, mask);
  CHECK(a.certified());
  CHECK(a.report().method.find("kronecker") != std::string::npos);
  const auto a_small = design_combiner(oblique_projector(small).e_wz, support_mask(g));
  CHECK((a.matrix() - kron_expand(a_small.matrix(), 3)).norm() < 1e-9);
  CHECK(a.report().objective == doctest::Approx(a_small.report().objective).epsilon(1e-9));
}

TEST_CASE("infeasible designs are reported") {
  SUBCASE("disconnected graph with a global consensus target") {
    const std::vector<Edge> edges{{0, 1}, {1, 2}, {3, 4}, {4, 5}};
    const Graph g(6, edges);
    const Matrix e = oblique_projector(SubspaceModel::signal_only(Matrix::Ones(6, 1))).e_wz;
    try {
      design_combiner(e, support_mask(g));
      FAIL("expected Infeasible");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::Infeasible);
    }
  }
  SUBCASE("bad arguments") {
    const Matrix e = Matrix::Constant(3, 3, 1.0 / 3.0);
    const SupportMask m = support_mask(complete_graph(3));
    CHECK_THROWS_AS(design_combiner(e, m, 0.0), Error);
    CHECK_THROWS_AS(design_combiner(e, m, 1.0), Error);
    CHECK_THROWS_AS(design_combiner(Matrix::Constant(3, 3, 0.5), m), Error);
  }
}
