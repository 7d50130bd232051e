#include "sva/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sva/sem.hpp"
#include "sva/special.hpp"

namespace sva {

namespace {

// Orthonormal basis of the centered column space, dropping directions whose
// singular value is negligible relative to the largest.
Eigen::MatrixXd centered_orthobasis(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd centered = A;
  for (int j = 0; j < centered.cols(); ++j)
    centered.col(j).array() -= centered.col(j).mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  const auto& d = svd.singularValues();
  const double tol = (d.size() ? d(0) : 0.0) * 1e-10;
  int rank = 0;
  for (int i = 0; i < d.size(); ++i)
    if (d(i) > tol) ++rank;
  if (rank == 0) throw std::invalid_argument("cca_overlap: rank-zero input");
  return svd.matrixU().leftCols(rank);
}

}  // namespace

double cca_overlap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() < 1 || B.cols() < 1)
    throw std::invalid_argument("cca_overlap: need at least one column");
  if (A.rows() != B.rows())
    throw std::invalid_argument("cca_overlap: row count mismatch");
  const long n = A.rows();
  if (n <= std::max(A.cols(), B.cols()))
    throw std::invalid_argument("cca_overlap: need n > max(p, q)");

  const Eigen::MatrixXd qa = centered_orthobasis(A);
  const Eigen::MatrixXd qb = centered_orthobasis(B);
  Eigen::BDCSVD<Eigen::MatrixXd> cross(qa.transpose() * qb);
  double sum = 0.0;
  for (int i = 0; i < cross.singularValues().size(); ++i) {
    const double rho = std::min(1.0, cross.singularValues()(i));
    sum += rho * rho;
  }
  return 100.0 * sum / static_cast<double>(std::max(A.cols(), B.cols()));
}

double r2_dependence(const Eigen::VectorXd& Y, const Eigen::MatrixXd& H) {
  if (H.cols() == 0) return 0.0;
  if (H.rows() != Y.size())
    throw std::invalid_argument("r2_dependence: row count mismatch");
  const Eigen::ArrayXd yc = Y.array() - Y.mean();
  const double y_ss = (yc * yc).sum();
  double total = 0.0;
  for (int k = 0; k < H.cols(); ++k) {
    const Eigen::ArrayXd hc = H.col(k).array() - H.col(k).mean();
    const double h_ss = (hc * hc).sum();
    if (y_ss <= 0.0 || h_ss <= 0.0) continue;
    const double cov = (yc * hc).sum();
    total += cov * cov / (y_ss * h_ss);
  }
  return total / H.cols();
}

double r2_diff(const Eigen::VectorXd& Y, const Eigen::MatrixXd& H_true,
               const Eigen::MatrixXd& H_hat) {
  const double denom = std::max<long>(H_true.cols(), std::max<long>(H_hat.cols(), 1));
  const double true_sum = r2_dependence(Y, H_true) * H_true.cols();
  const double est_sum =
      H_hat.cols() > 0 ? r2_dependence(Y, H_hat) * H_hat.cols() : 0.0;
  return (true_sum - est_sum) / denom;
}

Eigen::VectorXd fxj_mae(const std::vector<std::vector<double>>& fx_true,
                        const Eigen::MatrixXd& fhat_coeffs, bool hat_intercept,
                        const Eigen::VectorXd& Y) {
  const int J = static_cast<int>(fx_true.size());
  if (fhat_coeffs.rows() != J)
    throw std::invalid_argument("fxj_mae: coefficient row count mismatch");
  const int n = static_cast<int>(Y.size());
  const int p = static_cast<int>(fhat_coeffs.cols());

  Eigen::VectorXd out(J);
  for (int j = 0; j < J; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = Y(i);
      double hat = hat_intercept ? fhat_coeffs(j, 0) : 0.0;
      double power = y;
      for (int c = hat_intercept ? 1 : 0; c < p; ++c) {
        hat += fhat_coeffs(j, c) * power;
        power *= y;
      }
      acc += std::abs(poly_eval(fx_true[j], y) - hat);
    }
    out(j) = acc / n;
  }
  return out;
}

std::pair<double, double> ks_uniform(const Eigen::VectorXd& pvalues) {
  const int m = static_cast<int>(pvalues.size());
  if (m < 1) throw std::invalid_argument("ks_uniform: empty sample");
  std::vector<double> sorted(pvalues.data(), pvalues.data() + m);
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (int i = 0; i < m; ++i) {
    d = std::max(d, (i + 1.0) / m - sorted[i]);
    d = std::max(d, sorted[i] - static_cast<double>(i) / m);
  }
  // Exact small-sample distribution; beyond that the asymptotic Kolmogorov
  // tail with the finite-sample argument correction sqrt(m)+0.12+0.11/sqrt(m).
  if (m <= 40) return {d, 1.0 - ks_cdf_exact(m, d)};
  const double root_m = std::sqrt(static_cast<double>(m));
  const double p = kolmogorov_sf(d * (root_m + 0.12 + 0.11 / root_m));
  return {d, p};
}

std::pair<double, double> nested_ks(const Eigen::MatrixXd& outer_pvalues) {
  const int M = static_cast<int>(outer_pvalues.rows());
  if (M < 1) throw std::invalid_argument("nested_ks: empty matrix");
  Eigen::VectorXd inner(M);
  for (int r = 0; r < M; ++r)
    inner(r) = ks_uniform(outer_pvalues.row(r).transpose()).second;
  return ks_uniform(inner);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace sva
