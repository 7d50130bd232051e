#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sva/dag.hpp"
#include "sva/rng.hpp"

namespace sva {

struct Sparsity {
  double p0j = 0.0;    // fraction of j with f_{x_j} = 0
  double p0k = 0.0;    // fraction of k with f_{h_k} = 0
  double p0beta = 0.0; // minimum fraction of (k,j) with beta_kj = 0
  double p_dse = 0.0;  // fraction of j d-separated from y
};

// Generator settings for random additive gene-expression SEMs.
struct SemConfig {
  int J = 1000;
  int K = 10;
  int L = 10;
  int d_max = 1;
  double sigma_y = 1.0;
  double sigma_c = 1.0;
  double sigma_x = 1.0;
  double sigma_h = 0.0;  // base designs omit noise on the h equations
  Sparsity sparsity;
  bool dense_gamma = false;  // default: h_k paired with c_k (identity pattern)
};

// Full parametrization of one additive gene-expression SEM.
// Polynomials have no intercept: coeffs (a_1,...,a_d) mean a_1*y + ... + a_d*y^d.
struct SemSpec {
  int J = 0;
  int K = 0;
  int L = 0;
  Eigen::MatrixXd beta;   // K x J
  Eigen::MatrixXd gamma;  // L x K
  std::vector<std::vector<double>> fx_coeffs;  // J rows
  std::vector<std::vector<double>> fh_coeffs;  // K rows
  double sigma_y = 1.0;
  double sigma_c = 1.0;
  double sigma_x = 1.0;
  double sigma_h = 0.0;
  int d_max = 1;
  Sparsity sparsity;
  std::vector<int> j_dse;  // indices forced d-separated from y (may be empty)

  std::string to_json() const;
  static SemSpec from_json(const std::string& text);
};

double poly_eval(const std::vector<double>& coeffs, double y);
bool poly_is_zero(const std::vector<double>& coeffs);

struct Dataset {
  Eigen::VectorXd Y;       // n
  Eigen::MatrixXd X;       // n x J
  Eigen::MatrixXd C_true;  // n x L
  Eigen::MatrixXd H_true;  // n x K
  std::uint64_t seed = 0;

  // X and Y with a one-line header; columns y, x1..xJ.
  void write_csv(std::ostream& os) const;
};

// Node layout of the induced DAG: y = 0, c_l = 1..L, h_k = L+1..L+K,
// x_j = L+K+1..L+K+J.
struct SemNodeIds {
  int y;
  std::vector<int> c;
  std::vector<int> h;
  std::vector<int> x;
};

Dag induced_dag(const SemSpec& spec, SemNodeIds* ids = nullptr);

SemSpec build_sem(const SemConfig& config, Rng& rng);

// The fixed J=K=L=4 design used by the low-dimensional benchmark.
SemSpec build_lowdim_sem();

Dataset simulate(const SemSpec& spec, int n, Rng& rng, std::uint64_t seed_tag = 0);

}  // namespace sva
