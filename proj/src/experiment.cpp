#include "oblique/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "oblique/matrix_io.hpp"
#include "oblique/random.hpp"

namespace oblique {

namespace {

Vector uniform_vector(Index n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  const Graph graph = random_connected_graph(cfg.nodes, cfg.edge_prob, derive_seed(cfg.seed, kGraphStream));
  Rng rng(derive_seed(cfg.seed, kScenarioStream));

  const Matrix w_small = orthonormalize(standard_normal(cfg.nodes, cfg.signal_rank, rng));
  const Matrix z_small = cfg.interference_rank > 0
                             ? orthonormalize(standard_normal(cfg.nodes, cfg.interference_rank, rng))
                             : Matrix(cfg.nodes, 0);
  SubspaceModel model = SubspaceModel::from_bases(kron_expand(w_small, cfg.block), kron_expand(z_small, cfg.block));
  ObliqueProjector proj = oblique_projector(model);

  const Index p = model.signal_rank();
  const Index l = model.interference_rank();
  const Vector x_w = Vector::Constant(p, cfg.coef_mean) + standard_normal(p, rng);
  const Vector x_z = Vector::Constant(l, cfg.coef_mean) + standard_normal(l, rng);
  const Vector sigma_u2 = uniform_vector(cfg.nodes, cfg.sigma_u2_min, cfg.sigma_u2_max, rng);
  const Vector sigma_v2 = uniform_vector(cfg.nodes, cfg.sigma_v2_min, cfg.sigma_v2_max, rng);
  auto cost = std::make_shared<const MseNetworkCost>(BlockLayout::uniform(cfg.nodes, cfg.block), sigma_u2, sigma_v2,
                                                     model.w() * x_w, model.z() * x_z);

  const std::vector<Index> dims(static_cast<std::size_t>(cfg.nodes), cfg.block);
  const SupportMask mask = block_expand(support_mask(graph), dims);
  CombinationMatrix a = design_combiner(proj.e_wz, mask, cfg.eps);
  CombinationMatrix c = design_combiner(proj.p_d, mask, cfg.eps);

  return Scenario{graph, w_small, z_small, std::move(model), std::move(proj), std::move(cost), std::move(a),
                  std::move(c)};
}

std::vector<double> MsdCurve::db() const {
  std::vector<double> out(msd.size());
  std::transform(msd.begin(), msd.end(), out.begin(), to_db);
  return out;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

std::vector<std::vector<double>> simulate_run(const Scenario& sc, const ExperimentConfig& cfg, Index run) {
  const MseNetworkCost& cost = *sc.cost;
  const Index total = cost.layout().total();
  const Index iters = cfg.iterations;
  const double inv_n = 1.0 / static_cast<double>(cfg.nodes);
  const Vector& w_opt = cost.w_opt();
  const std::uint64_t data_seed = derive_seed(cfg.seed, kDataStream, static_cast<std::uint64_t>(run));

  const std::size_t ns = cfg.strategies.size();
  std::vector<std::vector<double>> out(ns, std::vector<double>(static_cast<std::size_t>(iters + 1)));
  auto record = [&](std::size_t s, Index slot, const Vector& w) {
    out[s][static_cast<std::size_t>(slot)] = (w_opt - w).squaredNorm() * inv_n;
  };
  const Vector zero = Vector::Zero(total);
  for (std::size_t s = 0; s < ns; ++s) record(s, 0, zero);

  bool need_centralized = false;
  bool need_diffusion = false;
  Index max_hops = 0;
  for (const Strategy& st : cfg.strategies) {
    if (st.kind == StrategyKind::Centralized)
      need_centralized = true;
    else
      need_diffusion = true;
    if (st.kind == StrategyKind::MultiHop) max_hops = std::max(max_hops, st.hops);
  }

  if (need_centralized) {
    Rng rng(data_seed);
    NetworkState state = NetworkState::zeros(total);
    for (Index i = 0; i < iters; ++i) {
      centralized_step(state, cost, sc.proj, cfg.mu_centralized, rng);
      for (std::size_t s = 0; s < ns; ++s)
        if (cfg.strategies[s].kind == StrategyKind::Centralized) record(s, i + 1, state.w);
    }
  }

  if (need_diffusion) {
    const LocalCombiner c(sc.c, "C");
    const LocalCombiner a(sc.a, "A");
    Rng rng(data_seed);
    NetworkState state = NetworkState::zeros(total);
    std::vector<Vector> hop(static_cast<std::size_t>(max_hops + 1));
    for (Index i = 0; i < iters; ++i) {
      oblique_diffusion_step(state, cost, c, a, cfg.mu, cfg.nu, rng);
      if (max_hops > 0) {
        hop[0] = state.y;
        for (Index h = 1; h <= max_hops; ++h)
          a.op().apply_serial(hop[static_cast<std::size_t>(h - 1)], hop[static_cast<std::size_t>(h)]);
      }
      for (std::size_t s = 0; s < ns; ++s) {
        const Strategy& st = cfg.strategies[s];
        switch (st.kind) {
          case StrategyKind::Diffusion: record(s, i + 1, state.w); break;
          case StrategyKind::MultiHop: record(s, i + 1, hop[static_cast<std::size_t>(st.hops)]); break;
          case StrategyKind::OrthogonalOnly: record(s, i + 1, state.y); break;
          case StrategyKind::Centralized: break;
        }
      }
    }
  }
  return out;
}

std::vector<MsdCurve> run_experiment(const Scenario& sc, const ExperimentConfig& cfg, Execution exec) {
  cfg.validate();
  const Index runs = cfg.runs;
  std::vector<std::vector<std::vector<double>>> per_run(static_cast<std::size_t>(runs));
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (Index r = 0; r < runs; ++r) per_run[static_cast<std::size_t>(r)] = simulate_run(sc, cfg, r);
  } else {
    for (Index r = 0; r < runs; ++r) per_run[static_cast<std::size_t>(r)] = simulate_run(sc, cfg, r);
  }

  const std::string fp = fingerprint(cfg);
  std::vector<MsdCurve> curves;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    MsdCurve curve{cfg.strategies[s].label(), fp, std::vector<double>(static_cast<std::size_t>(cfg.iterations + 1), 0.0)};
    for (const auto& run : per_run)
      for (std::size_t t = 0; t < curve.msd.size(); ++t) curve.msd[t] += run[s][t];
    for (double& v : curve.msd) v /= static_cast<double>(runs);
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<MsdCurve> run_experiment(const ExperimentConfig& cfg, Execution exec) {
  return run_experiment(build_scenario(cfg), cfg, exec);
}

double steady_state_msd(const MsdCurve& curve, double fraction) {
  require(curve.msd.size() >= 2, ErrorCode::InvalidParam, "curve has no iterations");
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::InvalidParam, "fraction must lie in (0, 1]");
  const std::size_t iters = curve.msd.size() - 1;
  const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(iters))));
  double sum = 0.0;
  for (std::size_t t = curve.msd.size() - count; t < curve.msd.size(); ++t) sum += curve.msd[t];
  return sum / static_cast<double>(count);
}

void write_curves(const std::vector<MsdCurve>& curves, const std::filesystem::path& csv_path,
                  const std::filesystem::path& echo_path, const ExperimentConfig& cfg) {
  require(!curves.empty(), ErrorCode::InvalidParam, "no curves to write");
  const std::size_t len = curves.front().msd.size();
  for (const MsdCurve& c : curves)
    require(c.msd.size() == len, ErrorCode::DimensionMismatch, "curves have different lengths");

  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + csv_path.string());
  csv << "iter";
  for (const MsdCurve& c : curves) csv << ',' << c.label;
  csv << '\n';
  std::vector<std::vector<double>> db;
  for (const MsdCurve& c : curves) db.push_back(c.db());
  for (std::size_t t = 0; t < len; ++t) {
    csv << static_cast<long long>(t) - 1;
    for (const auto& col : db) csv << ',' << format_significant(col[t], 6);
    csv << '\n';
  }
  if (!csv) throw Error(ErrorCode::IoError, "failed writing " + csv_path.string());

  std::ofstream echo(echo_path);
  if (!echo) throw Error(ErrorCode::IoError, "cannot write " + echo_path.string());
  echo << "# fingerprint = " << fingerprint(cfg) << '\n' << echo_config(cfg);
  if (!echo) throw Error(ErrorCode::IoError, "failed writing " + echo_path.string());
}

std::vector<std::pair<std::string, std::vector<double>>> read_curves(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty curves file");
  std::vector<std::pair<std::string, std::vector<double>>> out;
  {
    std::istringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "iter") throw Error(ErrorCode::ParseError, "curves header must start with 'iter'");
    while (std::getline(header, cell, ',')) out.emplace_back(cell, std::vector<double>{});
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (auto& col : out) {
      if (!std::getline(row, cell, ','))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": missing column");
      try {
        std::size_t used = 0;
        col.second.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad value '" + cell + "'");
      }
    }
  }
  return out;
}

void write_design_report(const Scenario& sc, const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# fingerprint = " << fingerprint(cfg) << '\n'
      << "nodes = " << sc.graph.size() << '\n'
      << "edges = " << sc.graph.edge_count() << '\n'
      << "dim = " << sc.model.dim() << '\n'
      << "signal_rank = " << sc.model.signal_rank() << '\n'
      << "interference_rank = " << sc.model.interference_rank() << '\n'
      << "projector_construction_gap = " << format_double(sc.proj.construction_gap) << '\n'
      << "\n[A: target E_WZ]\n"
      << to_text(sc.a.report()) << "\n[C: target P_D]\n"
      << to_text(sc.c.report());
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace oblique
