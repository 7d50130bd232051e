#include "sva/factorize.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "sva/rng.hpp"

namespace sva {

namespace {

// Flip each column of C (and the matching row of Lambda) so the entry with
// the largest absolute value is positive; ties go to the lowest row index.
void canonicalize_signs(Eigen::MatrixXd& C, Eigen::MatrixXd& Lambda) {
  for (int l = 0; l < C.cols(); ++l) {
    int best = 0;
    double best_abs = std::abs(C(0, l));
    for (int i = 1; i < C.rows(); ++i) {
      const double a = std::abs(C(i, l));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (C(best, l) < 0.0) {
      C.col(l) = -C.col(l);
      if (Lambda.rows() > l) Lambda.row(l) = -Lambda.row(l);
    }
  }
}

}  // namespace

FactorizationResult svd_factorize(const Eigen::MatrixXd& R, int L, SvdMode mode) {
  const int n = static_cast<int>(R.rows());
  const int J = static_cast<int>(R.cols());
  const int r = std::min(n, J);
  if (L < 1 || L > r) throw std::invalid_argument("svd_factorize: L out of range");
  if (!R.allFinite()) throw std::invalid_argument("svd_factorize: non-finite input");
  if (R.norm() == 0.0) throw std::domain_error("svd_factorize: zero matrix");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double root_n = std::sqrt(static_cast<double>(n));

  FactorizationResult out;
  out.singular_values = svd.singularValues();
  out.L_hat = L;
  out.mode = mode;

  const Eigen::MatrixXd V1 = svd.matrixV().leftCols(L);
  const Eigen::VectorXd d1 = out.singular_values.head(L);
  if (mode == SvdMode::kLeft) {
    out.C_hat = root_n * svd.matrixU().leftCols(L);
  } else {
    // standardized principal components, computed through R itself
    out.C_hat = root_n * (R * V1) * d1.cwiseInverse().asDiagonal();
  }
  out.Lambda = (1.0 / root_n) * d1.asDiagonal() * V1.transpose();
  canonicalize_signs(out.C_hat, out.Lambda);
  out.E = R - out.C_hat * out.Lambda;
  return out;
}

namespace {

// Squared singular values of A, largest first, via the smaller Gram matrix.
Eigen::VectorXd squared_singular_values(const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd gram = (A.rows() <= A.cols())
                                   ? Eigen::MatrixXd(A * A.transpose())
                                   : Eigen::MatrixXd(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().reverse();  // ascending -> descending
  return ev.cwiseMax(0.0);
}

// One permutation iteration: permute each column of R independently, project
// off the fitted subspace again, and mark which observed proportions were met
// or exceeded. Q is a thin orthonormal basis of the projection (may be empty).
void pa_iteration(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Q,
                  const Eigen::VectorXd& nu_hat, std::uint64_t seed,
                  std::uint64_t iteration, std::uint8_t* hits) {
  const int n = static_cast<int>(R.rows());
  const int J = static_cast<int>(R.cols());
  const int M = static_cast<int>(nu_hat.size());

  Rng rng(Rng::derive(seed, iteration));
  Eigen::MatrixXd Rb(n, J);
  for (int j = 0; j < J; ++j) {
    const auto perm = rng.permutation(n);
    for (int i = 0; i < n; ++i) Rb(i, j) = R(perm[i], j);
  }
  if (Q.cols() > 0) Rb -= Q * (Q.transpose() * Rb);

  const Eigen::VectorXd d2 = squared_singular_values(Rb);
  const double total = d2.sum();
  for (int j = 0; j < M; ++j)
    hits[j] = (total > 0.0 && d2(j) / total >= nu_hat(j)) ? 1 : 0;
}

ParallelAnalysisReport pa_run(const Eigen::MatrixXd& R, const Eigen::MatrixXd& H,
                              int B, double alpha_pa, std::uint64_t seed,
                              bool use_openmp) {
  if (B < 1) throw std::invalid_argument("parallel_analysis: B must be positive");
  const int n = static_cast<int>(R.rows());
  if (H.size() > 0 && (H.rows() != n || H.cols() != n))
    throw std::invalid_argument("parallel_analysis: hat matrix shape mismatch");

  const double trace_h = H.size() > 0 ? H.trace() : 0.0;
  const int M = n - static_cast<int>(std::ceil(trace_h - 1e-12));
  if (M < 1) throw std::invalid_argument("parallel_analysis: no degrees of freedom left");

  const Eigen::VectorXd d2 = squared_singular_values(R);
  const double total = d2.sum();
  if (total <= 0.0) throw std::domain_error("parallel_analysis: zero residual matrix");

  ParallelAnalysisReport report;
  report.M = std::min<int>(M, static_cast<int>(d2.size()));
  report.B = B;
  report.alpha_pa = alpha_pa;
  report.nu_hat = d2.head(report.M) / total;

  // Thin orthonormal basis of the projection, so each iteration re-projects
  // with 2npJ work instead of n^2 J.
  Eigen::MatrixXd Q(n, 0);
  if (H.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    int rank = 0;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()(i) > 0.5) ++rank;
    Q.resize(n, rank);
    int c = 0;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()(i) > 0.5) Q.col(c++) = es.eigenvectors().col(i);
  }

  std::vector<std::uint8_t> hits(static_cast<std::size_t>(B) * report.M);
  if (use_openmp) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < B; ++b)
      pa_iteration(R, Q, report.nu_hat, seed, static_cast<std::uint64_t>(b),
                   hits.data() + static_cast<std::size_t>(b) * report.M);
  } else {
    for (int b = 0; b < B; ++b)
      pa_iteration(R, Q, report.nu_hat, seed, static_cast<std::uint64_t>(b),
                   hits.data() + static_cast<std::size_t>(b) * report.M);
  }

  report.p_b.resize(report.M);
  for (int j = 0; j < report.M; ++j) {
    long count = 0;
    for (int b = 0; b < B; ++b)
      count += hits[static_cast<std::size_t>(b) * report.M + j];
    report.p_b(j) = static_cast<double>(count) / B;
  }

  report.p_b_corrected.resize(report.M);
  double running = 0.0;
  for (int j = 0; j < report.M; ++j) {
    running = std::max(running, report.p_b(j));
    report.p_b_corrected(j) = running;
  }

  report.L_hat = 0;
  for (int j = 0; j < report.M; ++j)
    if (report.p_b_corrected(j) < alpha_pa) ++report.L_hat;
  return report;
}

}  // namespace

ParallelAnalysisReport parallel_analysis(const Eigen::MatrixXd& R,
                                         const Eigen::MatrixXd& H, int B,
                                         double alpha_pa, std::uint64_t seed) {
  return pa_run(R, H, B, alpha_pa, seed, true);
}

ParallelAnalysisReport parallel_analysis_serial(const Eigen::MatrixXd& R,
                                                const Eigen::MatrixXd& H, int B,
                                                double alpha_pa,
                                                std::uint64_t seed) {
  return pa_run(R, H, B, alpha_pa, seed, false);
}

std::string ParallelAnalysisReport::to_json() const {
  nlohmann::json j;
  j["M"] = M;
  j["B"] = B;
  j["alpha_pa"] = alpha_pa;
  j["L_hat"] = L_hat;
  j["nu_hat"] = std::vector<double>(nu_hat.data(), nu_hat.data() + nu_hat.size());
  j["p_b"] = std::vector<double>(p_b.data(), p_b.data() + p_b.size());
  j["p_b_corrected"] = std::vector<double>(p_b_corrected.data(),
                                           p_b_corrected.data() + p_b_corrected.size());
  return j.dump(2);
}

}  // namespace sva
