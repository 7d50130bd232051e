#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sva {

// Shared span between the column spaces of A and B as a percentage:
// 100 * sum of squared canonical correlations / max(p, q), so missing
// directions count as zero overlap.
double cca_overlap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Mean R^2 of the per-column simple regressions h_k ~ y. Empty H gives 0.
double r2_dependence(const Eigen::VectorXd& Y, const Eigen::MatrixXd& H);

// Reported dependence-capture metric: mean true R^2 minus mean estimated R^2,
// both normalized by max(K, K_hat) so absent surrogates contribute zero.
double r2_diff(const Eigen::VectorXd& Y, const Eigen::MatrixXd& H_true,
               const Eigen::MatrixXd& H_hat);

// Per-feature mean absolute error between the true effect polynomials (no
// intercept) and the fitted coefficients, evaluated on the observed Y.
// fhat_coeffs rows hold (a_1..a_d), or (a_0, a_1..a_d) with hat_intercept.
Eigen::VectorXd fxj_mae(const std::vector<std::vector<double>>& fx_true,
                        const Eigen::MatrixXd& fhat_coeffs, bool hat_intercept,
                        const Eigen::VectorXd& Y);

// One-sample exact Kolmogorov-Smirnov statistic against U[0,1] and its
// asymptotic p-value (with the small-sample argument correction).
std::pair<double, double> ks_uniform(const Eigen::VectorXd& pvalues);

// Two-level KS: uniformity p-value per row, then KS over those p-values.
std::pair<double, double> nested_ks(const Eigen::MatrixXd& outer_pvalues);

struct MetricsReport {
  std::string method;
  int rep_index = 0;
  double cnode_overlap_pct = std::numeric_limits<double>::quiet_NaN();
  double hnode_overlap_pct = std::numeric_limits<double>::quiet_NaN();
  double r2_diff = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd fxj_mae;
  double fxj_mae_median = std::numeric_limits<double>::quiet_NaN();
  double ks_stat = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string failure;
};

double median(std::vector<double> values);

}  // namespace sva
