#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "sva/basis.hpp"
#include "sva/metrics.hpp"
#include "sva/rng.hpp"
#include "sva/sem.hpp"

namespace {

Eigen::MatrixXd random_matrix(int n, int j, sva::Rng& rng) {
  Eigen::MatrixXd m(n, j);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < j; ++c) m(r, c) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("identical spans overlap fully") {
  sva::Rng rng(61);
  const Eigen::MatrixXd a = random_matrix(50, 4, rng);
  Eigen::MatrixXd t = random_matrix(4, 4, rng);
  t += 5.0 * Eigen::MatrixXd::Identity(4, 4);  // make it safely invertible
  CHECK(sva::cca_overlap(a, a * t) == doctest::Approx(100.0).epsilon(1e-8));
}

TEST_CASE("orthogonal spans overlap not at all") {
  sva::Rng rng(62);
  const int n = 60;
  const Eigen::MatrixXd a = random_matrix(n, 3, rng);
  // complement projection of fresh columns against [1, a]
  Eigen::MatrixXd basis(n, 4);
  basis.col(0).setOnes();
  basis.rightCols(3) = a;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 4);
  Eigen::MatrixXd b = random_matrix(n, 3, rng);
  b -= q * (q.transpose() * b);
  CHECK(sva::cca_overlap(a, b) < 1e-6);
}

TEST_CASE("overlap is symmetric for equal dimensions and penalizes missing ones") {
  sva::Rng rng(63);
  const Eigen::MatrixXd a = random_matrix(40, 3, rng);
  const Eigen::MatrixXd b = random_matrix(40, 3, rng);
  CHECK(sva::cca_overlap(a, b) == doctest::Approx(sva::cca_overlap(b, a)).epsilon(1e-8));

  // a subspace of itself, but with fewer columns: penalized by max(p, q)
  const Eigen::MatrixXd sub = a.leftCols(2);
  const double overlap = sva::cca_overlap(a, sub);
  CHECK(overlap == doctest::Approx(100.0 * 2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("overlap is invariant to invertible recombination") {
  sva::Rng rng(64);
  const Eigen::MatrixXd a = random_matrix(50, 3, rng);
  const Eigen::MatrixXd b = random_matrix(50, 4, rng);
  Eigen::MatrixXd t = random_matrix(4, 4, rng);
  t += 5.0 * Eigen::MatrixXd::Identity(4, 4);
  CHECK(sva::cca_overlap(a, b) == doctest::Approx(sva::cca_overlap(a, b * t)).epsilon(1e-8));
}

TEST_CASE("cca_overlap input validation") {
  sva::Rng rng(65);
  const Eigen::MatrixXd a = random_matrix(20, 2, rng);
  CHECK_THROWS_AS(sva::cca_overlap(a, Eigen::MatrixXd::Zero(20, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(sva::cca_overlap(a, random_matrix(21, 2, rng)),
                  std::invalid_argument);
}

TEST_CASE("r2_dependence endpoints") {
  sva::Rng rng(66);
  Eigen::VectorXd y(5000);
  for (int i = 0; i < y.size(); ++i) y(i) = rng.normal();

  Eigen::MatrixXd exact(5000, 2);
  exact.col(0) = 2.0 * y;
  exact.col(1) = -0.5 * y;
  CHECK(sva::r2_dependence(y, exact) == doctest::Approx(1.0).epsilon(1e-10));

  const Eigen::MatrixXd noise = random_matrix(5000, 3, rng);
  CHECK(sva::r2_dependence(y, noise) < 0.01);
  CHECK(sva::r2_dependence(y, Eigen::MatrixXd(5000, 0)) == 0.0);
}

TEST_CASE("low-dim true mean R2 matches the analytic values") {
  const sva::SemSpec spec = sva::build_lowdim_sem();
  sva::Rng rng(67);
  const auto ds = sva::simulate(spec, 400000, rng);

  // simple linear regression h_k ~ y only sees the linear coefficient:
  // Cov(y, h_3) = -0.28, Cov(y, h_4) = 1.54, Cov(y, y^2) = 0
  const double var3 = 0.28 * 0.28 + 1.29 * 1.29 * 2 + 1.0;
  const double var4 = 1.54 * 1.54 + 0.59 * 0.59 * 2 + 1.0;
  const double linear =
      (0.28 * 0.28 / var3 + 1.54 * 1.54 / var4) / 4.0;  // about 0.1502
  CHECK(sva::r2_dependence(ds.Y, ds.H_true) == doctest::Approx(linear).epsilon(0.02));

  // regression on the full quadratic basis captures Var(f_{h_k})/Var(h_k)
  const double poly = ((var3 - 1.0) / var3 + (var4 - 1.0) / var4) / 4.0;  // 0.3818
  const int n = static_cast<int>(ds.Y.size());
  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = ds.Y;
  design.col(2) = ds.Y.array().square();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  double mean_r2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Eigen::VectorXd fitted = design * qr.solve(ds.H_true.col(k));
    const double sst =
        (ds.H_true.col(k).array() - ds.H_true.col(k).mean()).square().sum();
    mean_r2 += 1.0 - (ds.H_true.col(k) - fitted).squaredNorm() / sst;
  }
  mean_r2 /= 4.0;
  CHECK(mean_r2 == doctest::Approx(poly).epsilon(0.02));
}

TEST_CASE("r2_diff zero-pads missing surrogates") {
  sva::Rng rng(68);
  Eigen::VectorXd y(1000);
  for (int i = 0; i < y.size(); ++i) y(i) = rng.normal();
  Eigen::MatrixXd h_true(1000, 2);
  h_true.col(0) = y;
  h_true.col(1) = y * 2.0;
  // perfect single surrogate: captures one column's worth out of two
  const Eigen::MatrixXd h_hat = h_true.leftCols(1);
  CHECK(sva::r2_diff(y, h_true, h_hat) == doctest::Approx(0.5).epsilon(1e-8));
  // no surrogates at all
  CHECK(sva::r2_diff(y, h_true, Eigen::MatrixXd(1000, 0)) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fxj_mae endpoints") {
  sva::Rng rng(69);
  const int n = 1000000;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal();

  // identical polynomials give zero error
  std::vector<std::vector<double>> truth = {{1.0, -0.5}};
  Eigen::MatrixXd hat(1, 2);
  hat << 1.0, -0.5;
  CHECK(sva::fxj_mae(truth, hat, false, y)(0) == doctest::Approx(0.0));

  // f = y, fhat = 0: MAE converges to E|y| = sqrt(2/pi)
  truth = {{1.0}};
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  CHECK(sva::fxj_mae(truth, zero, false, y)(0) ==
        doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.01));

  // constant offset through an intercept column
  truth = {{}};
  Eigen::MatrixXd offset(1, 1);
  offset << 0.37;
  CHECK(sva::fxj_mae(truth, offset, true, y)(0) == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("KS statistic hand examples") {
  Eigen::VectorXd one(1);
  one << 0.5;
  CHECK(sva::ks_uniform(one).first == doctest::Approx(0.5).epsilon(1e-12));

  Eigen::VectorXd three(3);
  three << 0.25, 0.5, 0.75;
  CHECK(sva::ks_uniform(three).first == doctest::Approx(0.25).epsilon(1e-12));

  const int m = 10000;
  Eigen::VectorXd grid(m);
  for (int i = 0; i < m; ++i) grid(i) = (i + 0.5) / m;
  const auto [d, p] = sva::ks_uniform(grid);
  CHECK(d == doctest::Approx(1.0 / (2 * m)).epsilon(1e-10));
  CHECK(p > 0.999);
}

TEST_CASE("KS statistic is permutation invariant") {
  sva::Rng rng(70);
  Eigen::VectorXd p(200);
  for (int i = 0; i < p.size(); ++i) p(i) = rng.uniform();
  Eigen::VectorXd shuffled = p;
  const auto perm = rng.permutation(200);
  for (int i = 0; i < 200; ++i) shuffled(i) = p(perm[i]);
  CHECK(sva::ks_uniform(p).first == sva::ks_uniform(shuffled).first);
}

TEST_CASE("nested KS on uniform and degenerate stacks") {
  sva::Rng rng(71);
  Eigen::MatrixXd uniform(50, 200);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 200; ++c) uniform(r, c) = rng.uniform();
  const auto [stat, p] = sva::nested_ks(uniform);
  CHECK(stat < 0.25);
  CHECK(p > 0.01);

  const Eigen::MatrixXd degenerate = Eigen::MatrixXd::Constant(50, 200, 0.5);
  const auto [dstat, dp] = sva::nested_ks(degenerate);
  CHECK(dstat > 0.9);
  CHECK(dp < 1e-6);
}

TEST_CASE("median helper") {
  CHECK(sva::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(sva::median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
  CHECK(std::isnan(sva::median({})));
}
