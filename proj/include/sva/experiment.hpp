#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sva/metrics.hpp"
#include "sva/sem.hpp"
#include "sva/surrogate.hpp"

namespace sva {

struct ExperimentConfig {
  std::string scenario = "highdim";  // "lowdim" uses the fixed 4x4 design
  SemConfig sem;
  int n = 100;
  int M = 100;  // repetitions
  int basis_degree = 1;
  bool basis_intercept = false;
  PaConfig pa;  // B and alpha; per-repetition seeds are derived internally
  SelectorConfig selector;
  std::uint64_t seed = 1;
  std::vector<Method> methods = {Method::kSva, Method::kSvdr, Method::kSvdx,
                                 Method::kVanilla};
  bool null_mode = false;  // zero every f_{x_j} after drawing the SEM
  std::string out_dir = ".";

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

struct ExperimentResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<MetricsReport> rows;  // ordered by (rep, method)
  // Per-method M x J matrix of per-feature p-values (failed reps excluded).
  std::map<std::string, Eigen::MatrixXd> method_pvalues;
  // Per-method nested KS (statistic, p-value).
  std::map<std::string, std::pair<double, double>> nested;
};

// Runs the repetition loop (OpenMP across repetitions, seeds derived per
// repetition so ordering and thread count cannot change any value).
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_results_csv(const ExperimentResult& result, std::ostream& os);
std::string summary_json(const ExperimentResult& result);

// Writes results.csv and summary.json into config.out_dir.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result);

struct SweepSpec {
  // One of: J, KJ, n, d_max, sigma_c, sigma_x, p0j, p0k, p0beta, p0j_pdse.
  // KJ scales J as 10*K; p0j_pdse sets p_dse = p0j^2.
  std::string parameter;
  std::vector<double> values;
  ExperimentConfig base;

  std::string to_json() const;
  static SweepSpec from_json(const std::string& text);
};

// Applies one swept value to a copy of the base configuration.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base,
                                   const std::string& parameter, double value);

struct SweepResult {
  std::vector<std::pair<double, ExperimentResult>> runs;
  std::vector<std::string> skipped;  // diagnostics for invalid values
};

SweepResult run_sweep(const SweepSpec& sweep);

// One combined CSV keyed by the swept value.
void write_sweep_csv(const SweepSpec& sweep, const SweepResult& result,
                     std::ostream& os);

}  // namespace sva
