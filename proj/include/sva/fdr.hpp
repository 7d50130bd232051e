#pragma once

#include <Eigen/Dense>
#include <string>

namespace sva {

// Default evaluation grid {0, 0.05, ..., 0.95}.
Eigen::VectorXd default_lambda_grid();

struct Pi0Estimate {
  double pi0 = 1.0;        // clamped to (0, 1]
  double unclamped = 1.0;  // spline value at lambda = 1 before clamping
  Eigen::VectorXd lambda_grid;
  Eigen::VectorXd raw;     // #{p > lambda} / (m (1 - lambda)) on the grid
};

// Raw tail estimates smoothed by a natural cubic smoothing spline with 3
// effective degrees of freedom, extrapolated linearly to lambda = 1.
Pi0Estimate estimate_pi0_detail(const Eigen::VectorXd& pvalues,
                                const Eigen::VectorXd& lambda_grid);
double estimate_pi0(const Eigen::VectorXd& pvalues);
double estimate_pi0(const Eigen::VectorXd& pvalues,
                    const Eigen::VectorXd& lambda_grid);

// FDR estimate at threshold t: m * pi0 * t / #{p <= t}, capped at 1.
double fdr_at(const Eigen::VectorXd& pvalues, double pi0, double t);

// q_i = min over t >= p_i of the FDR estimate, in the input order.
Eigen::VectorXd qvalues(const Eigen::VectorXd& pvalues, double pi0);

// Local FDR via the probit transform: pi0 * phi(s) / f_S(s) with f_S a
// Gaussian kernel density over s_i = Phi^{-1}(p_i), Silverman bandwidth.
Eigen::VectorXd lfdr(const Eigen::VectorXd& pvalues, double pi0);

struct SignificanceSet {
  Eigen::VectorXd pvalues;
  double pi0_hat = 1.0;
  double pi0_unclamped = 1.0;
  Eigen::VectorXd qvalues;
  Eigen::VectorXd lfdr;
  Eigen::VectorXd lambda_grid;

  std::string to_json() const;
};

// Full multiple-testing summary for one p-value vector (needs m >= 10).
SignificanceSet analyze_pvalues(const Eigen::VectorXd& pvalues);

}  // namespace sva
