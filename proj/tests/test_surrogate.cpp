#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "sva/metrics.hpp"
#include "sva/rng.hpp"
#include "sva/sem.hpp"
#include "sva/surrogate.hpp"

namespace {

Eigen::MatrixXd random_matrix(int n, int j, sva::Rng& rng) {
  Eigen::MatrixXd m(n, j);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < j; ++c) m(r, c) = rng.normal();
  return m;
}

Eigen::VectorXd random_vector(int n, sva::Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  return (ac * bc).sum() / std::sqrt((ac * ac).sum() * (bc * bc).sum());
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (auto m : {sva::Method::kSva, sva::Method::kSvdr, sva::Method::kSvdx,
                 sva::Method::kVanilla})
    CHECK(sva::method_from_name(sva::method_name(m)) == m);
  CHECK_THROWS_AS(sva::method_from_name("nope"), std::invalid_argument);
}

TEST_CASE("find_signature selects everything when every column loads") {
  sva::Rng rng(81);
  const int n = 80, j = 40;
  const Eigen::VectorXd c = random_vector(n, rng);
  Eigen::VectorXd a(j);
  for (int k = 0; k < j; ++k) a(k) = 1.0 + rng.uniform();
  const Eigen::MatrixXd x = c * a.transpose() + 0.01 * random_matrix(n, j, rng);
  const auto sig = sva::find_signature(x, c, sva::SelectorConfig{});
  CHECK(sig.size() == j);
}

TEST_CASE("find_signature returns nothing on independent noise") {
  sva::Rng rng(82);
  int empty_count = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd c = random_vector(60, rng);
    const Eigen::MatrixXd x = random_matrix(60, 300, rng);
    if (sva::find_signature(x, c, sva::SelectorConfig{}).empty()) ++empty_count;
  }
  CHECK(empty_count >= 9);
}

TEST_CASE("find_signature rejects a constant factor") {
  sva::Rng rng(83);
  const Eigen::MatrixXd x = random_matrix(20, 15, rng);
  CHECK_THROWS_AS(
      sva::find_signature(x, Eigen::VectorXd::Ones(20), sva::SelectorConfig{}),
      std::invalid_argument);
}

TEST_CASE("planted signature recovery") {
  sva::Rng rng(84);
  const int n = 100, j = 1000, loaded = 200;
  const Eigen::VectorXd c = random_vector(n, rng);
  Eigen::MatrixXd x = random_matrix(n, j, rng);
  for (int k = 0; k < loaded; ++k) {
    double a = 0.5 + rng.uniform();
    if (rng.uniform() < 0.5) a = -a;
    x.col(k) += a * c;
  }
  const auto sig = sva::find_signature(x, c, sva::SelectorConfig{});
  int hits = 0, false_pos = 0;
  for (int idx : sig)
    (idx < loaded ? hits : false_pos)++;
  CHECK(hits >= 0.8 * loaded);
  if (!sig.empty())
    CHECK(static_cast<double>(false_pos) / sig.size() <= 0.2);
}

TEST_CASE("estimate_c_span on clean low-rank residual structure") {
  sva::Rng rng(85);
  const int n = 100, j = 400, l = 3;
  const Eigen::VectorXd y = random_vector(n, rng);
  Eigen::MatrixXd c = random_matrix(n, l, rng);
  const auto basis = sva::build_basis(y, 1, true);
  // the estimator sees residuals of the y fit, so put the factors there
  c -= basis.H * c;
  const Eigen::MatrixXd load = 3.0 * random_matrix(l, j, rng);
  const Eigen::MatrixXd x = y * Eigen::RowVectorXd::Ones(j) + c * load;
  const auto span = sva::estimate_c_span(x, y, basis, {100, 0.1, 7});
  REQUIRE_FALSE(span.empty);
  CHECK(span.L_hat == l);
  CHECK(sva::cca_overlap(c, span.C_hat) > 100.0 - 1e-6);
}

TEST_CASE("estimate_c_span flags a factor-free matrix") {
  sva::Rng rng(86);
  int empty_count = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd y = random_vector(60, rng);
    const Eigen::MatrixXd x = random_matrix(60, 200, rng);
    const auto basis = sva::build_basis(y, 1, true);
    const auto span =
        sva::estimate_c_span(x, y, basis, {60, 0.1, 1000 + static_cast<unsigned>(trial)});
    if (span.empty) {
      ++empty_count;
      CHECK(span.C_hat.cols() == 0);
      CHECK(span.L_hat == 0);
    }
  }
  CHECK(empty_count >= 9);
}

TEST_CASE("svdr surrogates live in the residual space") {
  sva::Rng rng(87);
  const int n = 100, j = 300;
  const Eigen::VectorXd y = random_vector(n, rng);
  const Eigen::MatrixXd c = random_matrix(n, 2, rng);
  const Eigen::MatrixXd x = y * Eigen::RowVectorXd::Ones(j) +
                            c * (2.0 * random_matrix(2, j, rng)) +
                            0.1 * random_matrix(n, j, rng);
  const auto basis = sva::build_basis(y, 1, true);
  const auto set = sva::build_surrogates_svdr(x, y, basis, {100, 0.1, 9});
  REQUIRE(set.H_hat.cols() > 0);
  for (int k = 0; k < set.H_hat.cols(); ++k) {
    for (int col = 0; col < basis.Phi.cols(); ++col) {
      const double dot = std::abs(basis.Phi.col(col).dot(set.H_hat.col(k)));
      CHECK(dot / (basis.Phi.col(col).norm() * set.H_hat.col(k).norm()) < 1e-6);
    }
    // unit sample variance convention
    const Eigen::ArrayXd cc = set.H_hat.col(k).array() - set.H_hat.col(k).mean();
    CHECK(cc.square().sum() / (n - 1) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("svdx drops the y-aligned factor") {
  sva::Rng rng(88);
  const int n = 80, j = 150;
  const Eigen::VectorXd y = random_vector(n, rng);
  Eigen::RowVectorXd a(j);
  for (int k = 0; k < j; ++k) a(k) = 1.0 + rng.uniform();
  const Eigen::MatrixXd x = y * a;  // exactly rank one, driven by y
  const auto set = sva::build_surrogates_svdx(x, y, {100, 0.1, 4});
  CHECK(set.H_hat.cols() == 0);
  REQUIRE_FALSE(set.selected_factor.empty());
  CHECK(set.selected_factor[0] == 0);
}

TEST_CASE("sva reproduces the factor from a rank-1 enriched matrix") {
  sva::Rng rng(89);
  const int n = 100, j = 500;
  const Eigen::VectorXd y = random_vector(n, rng);
  const Eigen::VectorXd c = random_vector(n, rng);
  Eigen::MatrixXd x = random_matrix(n, j, rng);
  for (int k = 0; k < 150; ++k) x.col(k) += (2.0 + rng.uniform()) * c;
  const auto basis = sva::build_basis(y, 1, true);
  const auto set =
      sva::build_surrogates_sva(x, y, basis, {100, 0.1, 5}, sva::SelectorConfig{});
  REQUIRE(set.H_hat.cols() >= 1);
  double best = 0.0;
  for (int k = 0; k < set.H_hat.cols(); ++k)
    best = std::max(best, std::abs(corr(set.H_hat.col(k), c)));
  CHECK(best > 0.95);
  CHECK(set.signature_sizes.size() == static_cast<std::size_t>(set.H_hat.cols()));
}

TEST_CASE("vanilla fit matches the plain basis fit") {
  sva::Rng rng(90);
  const int n = 50, j = 20;
  const Eigen::VectorXd y = random_vector(n, rng);
  const Eigen::MatrixXd x = random_matrix(n, j, rng);
  const auto basis = sva::build_basis(y, 2, true);
  const auto plain = sva::fit(basis, x);
  const auto fitted = sva::fit_method(x, y, basis, sva::vanilla_surrogates(n));
  CHECK((fitted.fhat_coeffs - plain.coeffs).cwiseAbs().maxCoeff() < 1e-8);
  for (int k = 0; k < j; ++k)
    CHECK(fitted.pvalues(k) == doctest::Approx(plain.pvalues(k)).epsilon(1e-8));
}

TEST_CASE("exact basis signal yields zero p-values with empty surrogates") {
  sva::Rng rng(91);
  const int n = 60;
  const Eigen::VectorXd y = random_vector(n, rng);
  const auto basis = sva::build_basis(y, 2, false);
  const Eigen::MatrixXd b = random_matrix(2, 8, rng);
  const Eigen::MatrixXd x = basis.Phi * b;
  const auto fit = sva::fit_method(x, y, basis, sva::vanilla_surrogates(n));
  for (int k = 0; k < 8; ++k) CHECK(fit.pvalues(k) < 1e-10);
}

TEST_CASE("scale equivariance of fit_method") {
  sva::Rng rng(92);
  const int n = 70, j = 5;
  const Eigen::VectorXd y = random_vector(n, rng);
  Eigen::MatrixXd x = random_matrix(n, j, rng);
  const auto basis = sva::build_basis(y, 2, false);
  sva::SurrogateSet set = sva::vanilla_surrogates(n);
  set.H_hat = random_matrix(n, 2, rng);
  const auto base = sva::fit_method(x, y, basis, set);
  x.col(2) *= 4.5;
  const auto scaled = sva::fit_method(x, y, basis, set);
  for (int c = 0; c < scaled.fhat_coeffs.cols(); ++c)
    CHECK(scaled.fhat_coeffs(2, c) ==
          doctest::Approx(4.5 * base.fhat_coeffs(2, c)).epsilon(1e-8));
  CHECK(scaled.pvalues(2) == doctest::Approx(base.pvalues(2)).epsilon(1e-8));
}

TEST_CASE("collinear surrogates are dropped") {
  sva::Rng rng(93);
  const int n = 40;
  const Eigen::VectorXd y = random_vector(n, rng);
  const auto basis = sva::build_basis(y, 1, true);
  sva::SurrogateSet set = sva::vanilla_surrogates(n);
  set.H_hat.resize(n, 2);
  set.H_hat.col(0) = random_vector(n, rng);
  set.H_hat.col(1) = 2.0 * set.H_hat.col(0);  // exact duplicate direction
  const Eigen::MatrixXd x = random_matrix(n, 3, rng);
  const auto fit = sva::fit_method(x, y, basis, set);
  CHECK(fit.dropped_surrogates == 1);
  for (int k = 0; k < 3; ++k) {
    CHECK(fit.pvalues(k) >= 0.0);
    CHECK(fit.pvalues(k) <= 1.0);
  }
}

TEST_CASE("oracle surrogates beat vanilla on the low-dim design") {
  const sva::SemSpec spec = sva::build_lowdim_sem();
  sva::Rng rng(94);
  const auto ds = sva::simulate(spec, 100, rng);
  const auto basis = sva::build_basis(ds.Y, 2, false);

  sva::SurrogateSet oracle = sva::vanilla_surrogates(100);
  oracle.H_hat = ds.H_true;
  for (int k = 0; k < 4; ++k) {
    const Eigen::ArrayXd c = oracle.H_hat.col(k).array() - oracle.H_hat.col(k).mean();
    oracle.H_hat.col(k) /= std::sqrt(c.square().sum() / 99.0);
  }

  const auto with_oracle = sva::fit_method(ds.X, ds.Y, basis, oracle);
  const auto vanilla = sva::fit_method(ds.X, ds.Y, basis, sva::vanilla_surrogates(100));

  const Eigen::VectorXd mae_oracle =
      sva::fxj_mae(spec.fx_coeffs, with_oracle.fhat_coeffs, false, ds.Y);
  const Eigen::VectorXd mae_vanilla =
      sva::fxj_mae(spec.fx_coeffs, vanilla.fhat_coeffs, false, ds.Y);
  CHECK(sva::median({mae_oracle(0), mae_oracle(1), mae_oracle(2), mae_oracle(3)}) <
        sva::median({mae_vanilla(0), mae_vanilla(1), mae_vanilla(2), mae_vanilla(3)}));
}

TEST_CASE("sva falls back to vanilla when no surrogates survive") {
  sva::Rng rng(95);
  const int n = 50;
  const Eigen::VectorXd y = random_vector(n, rng);
  const auto basis = sva::build_basis(y, 1, true);
  sva::SurrogateSet set;
  set.method = sva::Method::kSva;
  set.H_hat.resize(n, 0);
  const auto fit = sva::fit_method(random_matrix(n, 4, rng), y, basis, set);
  CHECK(fit.fallback_vanilla);
  CHECK(fit.to_json().find("\"fallback_vanilla\"") != std::string::npos);
}

TEST_CASE("pipeline is deterministic") {
  sva::Rng rng(96);
  const int n = 60, j = 200;
  const Eigen::VectorXd y = random_vector(n, rng);
  const Eigen::MatrixXd c = random_matrix(n, 2, rng);
  const Eigen::MatrixXd x = c * (2.0 * random_matrix(2, j, rng)) +
                            random_matrix(n, j, rng);
  const auto basis = sva::build_basis(y, 1, true);
  const sva::PaConfig pa{50, 0.1, 13};
  const auto a = sva::build_surrogates_sva(x, y, basis, pa, sva::SelectorConfig{});
  const auto b = sva::build_surrogates_sva(x, y, basis, pa, sva::SelectorConfig{});
  CHECK(a.H_hat == b.H_hat);
  CHECK(a.signature_sizes == b.signature_sizes);
}
