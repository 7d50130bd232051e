#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace sva {

enum class SvdMode { kLeft, kRight };

// SVD split of a residual matrix R into C_hat * Lambda + E.
// Factor columns are scaled by sqrt(n) so their sample variance is about 1;
// loadings absorb the reciprocal.
struct FactorizationResult {
  Eigen::MatrixXd C_hat;            // n x L_hat
  Eigen::MatrixXd Lambda;           // L_hat x J
  Eigen::MatrixXd E;                // n x J
  Eigen::VectorXd singular_values;  // min(n, J), nonincreasing
  int L_hat = 0;
  SvdMode mode = SvdMode::kLeft;
  bool empty = false;  // set when a caller asked for zero factors
};

// Left mode takes the leading left singular vectors; right mode goes through
// the standardized principal components Z = R S D^{-1} explicitly. Both give
// the same factors up to floating-point noise. Column signs are canonical:
// the largest-absolute entry of each factor is positive, ties broken by the
// lowest row index.
FactorizationResult svd_factorize(const Eigen::MatrixXd& R, int L, SvdMode mode);

struct PaConfig {
  int B = 100;
  double alpha = 0.1;
  std::uint64_t seed = 0;
};

struct ParallelAnalysisReport {
  int M = 0;                       // n - ceil(trace H)
  Eigen::VectorXd nu_hat;          // M observed variance proportions
  Eigen::VectorXd p_b;             // M permutation proportions
  Eigen::VectorXd p_b_corrected;   // nondecreasing correction of p_b
  int L_hat = 0;
  int B = 0;
  double alpha_pa = 0.0;

  std::string to_json() const;
};

// Permutation test for the number of significant singular values of R, where
// H is the hat matrix of the fit that produced R. H may be 0x0 when R was not
// produced by a regression (no re-projection, M = n). The B iterations use
// generator streams derived from (seed, iteration), so the OpenMP version is
// bit-identical to the serial reference.
ParallelAnalysisReport parallel_analysis(const Eigen::MatrixXd& R,
                                         const Eigen::MatrixXd& H, int B,
                                         double alpha_pa, std::uint64_t seed);

// Serial reference implementation, kept for testing and benchmarking.
ParallelAnalysisReport parallel_analysis_serial(const Eigen::MatrixXd& R,
                                                const Eigen::MatrixXd& H, int B,
                                                double alpha_pa,
                                                std::uint64_t seed);

}  // namespace sva
