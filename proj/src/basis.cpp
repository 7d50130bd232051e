#include "sva/basis.hpp"

#include <stdexcept>

#include "sva/special.hpp"

namespace sva {

BasisModel build_basis(const Eigen::VectorXd& Y, int degree, bool include_intercept) {
  const int n = static_cast<int>(Y.size());
  if (degree < 0) throw std::invalid_argument("build_basis: negative degree");
  if (degree == 0 && !include_intercept)
    throw std::invalid_argument("build_basis: degree 0 needs an intercept");
  const int p = degree + (include_intercept ? 1 : 0);
  if (n <= p) throw std::invalid_argument("build_basis: need n > p");

  Eigen::VectorXd base = Y;
  if (include_intercept) base.array() -= Y.mean();

  BasisModel model;
  model.degree = degree;
  model.include_intercept = include_intercept;
  model.Phi.resize(n, p);
  int col = 0;
  if (include_intercept) model.Phi.col(col++).setOnes();
  Eigen::VectorXd power = Eigen::VectorXd::Ones(n);
  for (int d = 1; d <= degree; ++d) {
    power.array() *= base.array();
    model.Phi.col(col++) = power;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(model.Phi);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw std::domain_error("build_basis: design matrix is rank deficient");

  const Eigen::MatrixXd thin_q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(model.Phi).householderQ() *
      Eigen::MatrixXd::Identity(n, p);
  model.H = thin_q * thin_q.transpose();
  model.trace_H = model.H.trace();
  return model;
}

FitResult fit(const BasisModel& model, const Eigen::MatrixXd& X) {
  const int n = model.n(), p = model.p();
  if (X.rows() != n) throw std::invalid_argument("fit: row count mismatch");
  const int J = static_cast<int>(X.cols());

  FitResult out;
  out.fitted = model.H * X;
  out.residuals = X - out.fitted;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(model.Phi);
  out.coeffs = qr.solve(X).transpose();

  // Overall F-test per column against the intercept-only (or zero-mean) model.
  const int q = p - (model.include_intercept ? 1 : 0);
  out.pvalues.resize(J);
  for (int j = 0; j < J; ++j) {
    if (q == 0) {
      out.pvalues(j) = 1.0;
      continue;
    }
    const double ssr1 = out.residuals.col(j).squaredNorm();
    double ssr0;
    if (model.include_intercept) {
      const Eigen::VectorXd centered = X.col(j).array() - X.col(j).mean();
      ssr0 = centered.squaredNorm();
    } else {
      ssr0 = X.col(j).squaredNorm();
    }
    if (ssr1 <= 0.0) {
      out.pvalues(j) = 0.0;
      continue;
    }
    const double fstat = ((ssr0 - ssr1) / q) / (ssr1 / (n - p));
    out.pvalues(j) = f_sf(fstat, q, n - p);
  }
  return out;
}

}  // namespace sva
