// Command-line front end: design, denoise, learn and experiment subcommands.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oblique/combiner.hpp"
#include "oblique/config.hpp"
#include "oblique/denoise.hpp"
#include "oblique/experiment.hpp"
#include "oblique/graph.hpp"
#include "oblique/matrix_io.hpp"
#include "oblique/projector.hpp"

namespace fs = std::filesystem;
using namespace oblique;

namespace {

struct ModelInputs {
  std::string graph;
  std::string basis_w;
  std::string basis_z;
};

void add_model_flags(CLI::App* cmd, ModelInputs& in) {
  cmd->add_option("--graph", in.graph, "graph file ('nodes N' then 1-indexed 'k l' pairs)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--basis-w", in.basis_w, "signal basis W (matrix file)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--basis-z", in.basis_z, "interference basis Z (matrix file); omit for none")
      ->check(CLI::ExistingFile);
}

struct LoadedModel {
  Graph graph;
  SubspaceModel model;
  SupportMask mask;
};

// Agents own equal row blocks of W: the block size is rows(W) / nodes.
LoadedModel load_model(const ModelInputs& in) {
  Graph graph = read_graph(fs::path(in.graph));
  const Matrix w = read_matrix(fs::path(in.basis_w));
  const Matrix z = in.basis_z.empty() ? Matrix(w.rows(), 0) : read_matrix(fs::path(in.basis_z));
  require(w.rows() % graph.size() == 0, ErrorCode::DimensionMismatch,
          "rows of W (" + std::to_string(w.rows()) + ") are not a multiple of the node count (" +
              std::to_string(graph.size()) + ")");
  SubspaceModel model = z.cols() > 0 ? SubspaceModel::from_bases(w, z) : SubspaceModel::signal_only(w);
  const Index block = w.rows() / graph.size();
  SupportMask mask = support_mask(graph);
  if (block > 1) mask = block_expand(mask, std::vector<Index>(static_cast<std::size_t>(graph.size()), block));
  return {std::move(graph), std::move(model), std::move(mask)};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

fs::path report_path(const fs::path& out) { return fs::path(out.string() + ".report.txt"); }

int run_design(const ModelInputs& in, double eps, const std::string& target, const std::string& out) {
  const LoadedModel lm = load_model(in);
  const ObliqueProjector proj = oblique_projector(lm.model);
  const Matrix& e = target == "oblique" ? proj.e_wz : proj.p_d;
  const CombinationMatrix a = design_combiner(e, lm.mask, eps);
  write_matrix(fs::path(out), a.matrix());
  write_text(report_path(out), "target = " + target + "\n" + to_text(a.report()));
  std::cout << "objective = " << format_double(a.report().objective) << '\n';
  return 0;
}

int run_denoise(const ModelInputs& in, double sigma_v, Index iters, std::uint64_t seed, const std::string& combiner,
                double eps, const std::string& out) {
  const LoadedModel lm = load_model(in);
  const ObliqueProjector proj = oblique_projector(lm.model);
  std::optional<CombinationMatrix> a;
  if (combiner == "design")
    a = design_combiner(proj.e_wz, lm.mask, eps);
  else
    a = CombinationMatrix::certify(read_matrix(fs::path(combiner)), proj.e_wz, lm.mask);
  a->require_certified("A");
  const StaticObservation obs = generate_static(lm.model, sigma_v, seed);
  const DenoiseTrajectory traj = distributed_denoise(obs, *a, iters, Execution::Parallel);
  write_denoise_csv(fs::path(out), traj);
  std::cout << "factor = " << format_double(traj.factor) << "\nfinal_error = "
            << format_double(traj.error_norms().back()) << '\n';
  return 0;
}

ExperimentConfig load_with_preset(const std::string& config, const std::string& preset) {
  ExperimentConfig base = preset_config(preset);
  if (config.empty()) {
    base.validate();
    return base;
  }
  return load_config(fs::path(config), std::move(base));
}

int run_learn(const std::string& config, const std::string& preset, const std::string& strategy,
              const std::string& out) {
  ExperimentConfig cfg = load_with_preset(config, preset);
  cfg.strategies = {Strategy::parse(strategy)};
  const std::vector<MsdCurve> curves = run_experiment(cfg);
  std::ofstream csv(out);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + out);
  csv << "iter,msd_db\n";
  const std::vector<double> db = curves.front().db();
  for (std::size_t t = 0; t < db.size(); ++t)
    csv << static_cast<long long>(t) - 1 << ',' << format_significant(db[t], 6) << '\n';
  if (!csv) throw Error(ErrorCode::IoError, "failed writing " + out);
  std::cout << curves.front().label << " steady_state_db = "
            << format_significant(to_db(steady_state_msd(curves.front(), cfg.steady_fraction)), 6) << '\n';
  return 0;
}

int run_experiment_cmd(const std::string& config, const std::string& preset, const std::string& out_dir) {
  const ExperimentConfig cfg = load_with_preset(config, preset);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const Scenario sc = build_scenario(cfg);
  write_design_report(sc, cfg, dir / "design_report.txt");
  const std::vector<MsdCurve> curves = run_experiment(sc, cfg);
  write_curves(curves, dir / "curves.csv", dir / "config.echo.txt", cfg);
  for (const MsdCurve& c : curves)
    std::cout << c.label << " steady_state_db = " << format_significant(to_db(steady_state_msd(c, cfg.steady_fraction)), 6)
              << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized estimation and learning with low-rank interference"};
  app.require_subcommand(1);

  ModelInputs design_in;
  double design_eps = 0.001;
  std::string design_target = "oblique";
  std::string design_out;
  auto* design = app.add_subcommand("design", "design a graph-sparse combination matrix");
  add_model_flags(design, design_in);
  design->add_option("--eps", design_eps, "required margin: ||A - E||_2 <= 1 - eps")->capture_default_str();
  design->add_option("--target", design_target, "E_WZ (oblique) or P_D (orthogonal)")
      ->check(CLI::IsMember({"oblique", "orthogonal"}))
      ->capture_default_str();
  design->add_option("--out", design_out, "output matrix file; the report goes to <out>.report.txt")->required();

  ModelInputs denoise_in;
  double sigma_v = 0.1;
  Index iters = 300;
  std::uint64_t seed = 1;
  std::string combiner = "design";
  double denoise_eps = 0.001;
  std::string denoise_out;
  auto* denoise = app.add_subcommand("denoise", "run the distributed de-noising recursion");
  add_model_flags(denoise, denoise_in);
  denoise->add_option("--sigma-v", sigma_v, "noise standard deviation")->capture_default_str();
  denoise->add_option("--iters", iters, "number of neighbor rounds")->check(CLI::NonNegativeNumber)->capture_default_str();
  denoise->add_option("--seed", seed, "observation seed")->capture_default_str();
  denoise->add_option("--combiner", combiner, "matrix file, or 'design' to design one")->capture_default_str();
  denoise->add_option("--eps", denoise_eps, "margin used with --combiner design")->capture_default_str();
  denoise->add_option("--out", denoise_out, "output CSV")->required();

  std::string learn_config;
  std::string learn_preset = "desk";
  std::string strategy;
  std::string learn_out;
  auto* learn = app.add_subcommand("learn", "Monte Carlo MSD curve of one strategy");
  learn->add_option("--config", learn_config, "key = value config file")->check(CLI::ExistingFile);
  learn->add_option("--preset", learn_preset, "base settings")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  learn->add_option("--strategy", strategy, "centralized | diffusion | multihop:S | orthogonal-only")->required();
  learn->add_option("--out", learn_out, "output CSV")->required();

  std::string exp_config;
  std::string exp_preset = "desk";
  std::string out_dir;
  auto* experiment = app.add_subcommand("experiment", "full network experiment with every configured strategy");
  experiment->add_option("--config", exp_config, "key = value config file")->check(CLI::ExistingFile);
  experiment->add_option("--preset", exp_preset, "base settings")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  experiment->add_option("--out-dir", out_dir, "directory for curves.csv, config.echo.txt, design_report.txt")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) return run_design(design_in, design_eps, design_target, design_out);
    if (*denoise) return run_denoise(denoise_in, sigma_v, iters, seed, combiner, denoise_eps, denoise_out);
    if (*learn) return run_learn(learn_config, learn_preset, strategy, learn_out);
    if (*experiment) return run_experiment_cmd(exp_config, exp_preset, out_dir);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
