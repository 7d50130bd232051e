#include <Eigen/Dense>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sva/experiment.hpp"
#include "sva/factorize.hpp"
#include "sva/fdr.hpp"
#include "sva/sem.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Numeric CSV with an optional header line.
Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == 0) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric && rows.empty()) continue;  // header
    if (!numeric) throw std::invalid_argument("non-numeric cell in " + path);
    rows.push_back(row);
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix in " + path);
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw std::invalid_argument("ragged rows in " + path);
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  }
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate variable analysis toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw one dataset from an SEM");
  bool sim_lowdim = false;
  sva::SemConfig sem;
  int sim_n = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_out, sim_spec_out;
  sim->add_flag("--lowdim", sim_lowdim, "use the fixed 4-factor design");
  sim->add_option("--J", sem.J);
  sim->add_option("--K", sem.K);
  sim->add_option("--L", sem.L);
  sim->add_option("--d-max", sem.d_max);
  sim->add_option("--sigma-c", sem.sigma_c);
  sim->add_option("--sigma-x", sem.sigma_x);
  sim->add_option("--sigma-h", sem.sigma_h);
  sim->add_option("--p0j", sem.sparsity.p0j);
  sim->add_option("--p0k", sem.sparsity.p0k);
  sim->add_option("--p0beta", sem.sparsity.p0beta);
  sim->add_option("--p-dse", sem.sparsity.p_dse);
  sim->add_option("--n", sim_n, "observations");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", sim_out, "dataset CSV (default stdout)");
  sim->add_option("--spec-out", sim_spec_out, "write the drawn SEM spec as JSON");

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment");
  std::string run_config;
  std::uint64_t run_seed = 0;
  int run_reps = 0;
  std::string run_out, run_scenario;
  run->add_option("--config", run_config, "ExperimentConfig JSON file");
  run->add_option("--seed", run_seed, "override master seed");
  run->add_option("--reps", run_reps, "override repetition count");
  run->add_option("--out", run_out, "override output directory");
  run->add_option("--scenario", run_scenario, "override scenario name");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Univariate sensitivity sweep");
  std::string swp_config, swp_out = ".";
  swp->add_option("--config", swp_config, "SweepSpec JSON file")->required();
  swp->add_option("--out", swp_out, "output directory");

  // pa
  auto* pa_cmd = app.add_subcommand("pa", "Parallel analysis on a CSV matrix");
  std::string pa_input, pa_out;
  int pa_b = 100;
  double pa_alpha = 0.1;
  std::uint64_t pa_seed = 1;
  pa_cmd->add_option("--input", pa_input, "matrix CSV")->required();
  pa_cmd->add_option("--B", pa_b, "permutation count");
  pa_cmd->add_option("--alpha", pa_alpha, "significance cutoff");
  pa_cmd->add_option("--seed", pa_seed);
  pa_cmd->add_option("--out", pa_out, "report JSON (default stdout)");

  // fdr
  auto* fdr_cmd = app.add_subcommand("fdr", "q-values and local FDR for p-values");
  std::string fdr_input, fdr_out;
  fdr_cmd->add_option("--input", fdr_input, "p-value CSV (one column)")->required();
  fdr_cmd->add_option("--out", fdr_out, "report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      sva::Rng rng(sim_seed);
      const sva::SemSpec spec =
          sim_lowdim ? sva::build_lowdim_sem() : sva::build_sem(sem, rng);
      const sva::Dataset ds = sva::simulate(spec, sim_n, rng, sim_seed);
      std::ostringstream csv;
      ds.write_csv(csv);
      write_text(sim_out, csv.str());
      if (!sim_spec_out.empty()) write_text(sim_spec_out, spec.to_json() + "\n");
    } else if (run->parsed()) {
      sva::ExperimentConfig config;
      if (!run_config.empty())
        config = sva::ExperimentConfig::from_json(slurp(run_config));
      if (run->count("--seed")) config.seed = run_seed;
      if (run->count("--reps")) config.M = run_reps;
      if (!run_out.empty()) config.out_dir = run_out;
      if (!run_scenario.empty()) config.scenario = run_scenario;
      const sva::ExperimentResult result = sva::run_experiment(config);
      sva::write_outputs(config, result);
    } else if (swp->parsed()) {
      const sva::SweepSpec spec = sva::SweepSpec::from_json(slurp(swp_config));
      const sva::SweepResult result = sva::run_sweep(spec);
      std::ostringstream csv;
      sva::write_sweep_csv(spec, result, csv);
      write_text(swp_out + "/sweep_results.csv", csv.str());
      for (const auto& note : result.skipped)
        std::cerr << "skipped: " << note << "\n";
    } else if (pa_cmd->parsed()) {
      const Eigen::MatrixXd R = read_matrix_csv(pa_input);
      const auto report = sva::parallel_analysis(R, Eigen::MatrixXd(), pa_b,
                                                 pa_alpha, pa_seed);
      write_text(pa_out, report.to_json() + "\n");
    } else if (fdr_cmd->parsed()) {
      const Eigen::MatrixXd p = read_matrix_csv(fdr_input);
      const Eigen::VectorXd flat =
          Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
      write_text(fdr_out, sva::analyze_pvalues(flat).to_json() + "\n");
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
