#pragma once

#include <Eigen/Dense>

namespace sva {

// Polynomial design matrix and its projection (hat) matrix.
struct BasisModel {
  int degree = 0;
  bool include_intercept = false;
  Eigen::MatrixXd Phi;  // n x p
  Eigen::MatrixXd H;    // n x n projection onto span(Phi)
  double trace_H = 0.0;

  int n() const { return static_cast<int>(Phi.rows()); }
  int p() const { return static_cast<int>(Phi.cols()); }
};

struct FitResult {
  Eigen::MatrixXd coeffs;     // J x p
  Eigen::MatrixXd fitted;     // n x J
  Eigen::MatrixXd residuals;  // n x J
  Eigen::VectorXd pvalues;    // J, overall F-test of f_{x_j}(y) = 0
};

// Columns y, y^2, ..., y^degree; a leading 1s column when include_intercept.
// Y is centered before powers are taken only when include_intercept is set.
// degree 0 is only valid with an intercept (mean model).
BasisModel build_basis(const Eigen::VectorXd& Y, int degree, bool include_intercept);

FitResult fit(const BasisModel& model, const Eigen::MatrixXd& X);

}  // namespace sva
