#include "sva/fdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "sva/special.hpp"

namespace sva {

Eigen::VectorXd default_lambda_grid() {
  Eigen::VectorXd grid(20);
  for (int i = 0; i < 20; ++i) grid(i) = 0.05 * i;
  return grid;
}

namespace {

struct SplineBasis {
  Eigen::MatrixXd Q;   // m x (m-2) second-difference operator
  Eigen::MatrixXd R;   // (m-2) x (m-2) roughness matrix
  Eigen::VectorXd h;   // knot spacings
};

SplineBasis spline_basis(const Eigen::VectorXd& x) {
  const int m = static_cast<int>(x.size());
  SplineBasis b;
  b.h = x.tail(m - 1) - x.head(m - 1);
  b.Q = Eigen::MatrixXd::Zero(m, m - 2);
  b.R = Eigen::MatrixXd::Zero(m - 2, m - 2);
  for (int i = 1; i <= m - 2; ++i) {
    const int c = i - 1;
    b.Q(i - 1, c) = 1.0 / b.h(i - 1);
    b.Q(i, c) = -1.0 / b.h(i - 1) - 1.0 / b.h(i);
    b.Q(i + 1, c) = 1.0 / b.h(i);
    b.R(c, c) = (b.h(i - 1) + b.h(i)) / 3.0;
    if (c + 1 < m - 2) {
      b.R(c, c + 1) = b.h(i) / 6.0;
      b.R(c + 1, c) = b.h(i) / 6.0;
    }
  }
  return b;
}

// Effective degrees of freedom of the smoother at penalty alpha.
double spline_edof(const SplineBasis& b, double alpha) {
  const int m = static_cast<int>(b.Q.rows());
  const Eigen::MatrixXd qtq = b.Q.transpose() * b.Q;
  const Eigen::MatrixXd inner = (b.R + alpha * qtq).ldlt().solve(qtq);
  return m - alpha * inner.trace();
}

}  // namespace

Pi0Estimate estimate_pi0_detail(const Eigen::VectorXd& pvalues,
                                const Eigen::VectorXd& lambda_grid) {
  const int m = static_cast<int>(pvalues.size());
  if (m == 0) throw std::invalid_argument("estimate_pi0: empty p-value vector");
  const int g = static_cast<int>(lambda_grid.size());
  if (g < 4) throw std::invalid_argument("estimate_pi0: grid too small");
  for (int i = 0; i < g; ++i) {
    if (lambda_grid(i) < 0.0 || lambda_grid(i) >= 1.0)
      throw std::invalid_argument("estimate_pi0: grid must lie in [0,1)");
    if (i > 0 && lambda_grid(i) <= lambda_grid(i - 1))
      throw std::invalid_argument("estimate_pi0: grid must be increasing");
  }

  Pi0Estimate out;
  out.lambda_grid = lambda_grid;
  out.raw.resize(g);
  for (int i = 0; i < g; ++i) {
    const double lam = lambda_grid(i);
    const int count = static_cast<int>((pvalues.array() > lam).count());
    out.raw(i) = count / (m * (1.0 - lam));
  }

  // Natural cubic smoothing spline with 3 effective degrees of freedom,
  // penalty found by bisection in log alpha.
  const SplineBasis basis = spline_basis(lambda_grid);
  double lo = -12.0, hi = 12.0;  // log10 alpha
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spline_edof(basis, std::pow(10.0, mid)) > 3.0)
      lo = mid;
    else
      hi = mid;
  }
  const double alpha = std::pow(10.0, 0.5 * (lo + hi));

  const Eigen::MatrixXd lhs = basis.R + alpha * basis.Q.transpose() * basis.Q;
  const Eigen::VectorXd gamma = lhs.ldlt().solve(basis.Q.transpose() * out.raw);
  const Eigen::VectorXd fitted = out.raw - alpha * basis.Q * gamma;

  // Linear extrapolation past the last knot using the end slope of the
  // natural spline (zero second derivative at the boundary knot).
  const double h_last = basis.h(g - 2);
  const double gamma_last = gamma(g - 3);
  const double slope =
      (fitted(g - 1) - fitted(g - 2)) / h_last + h_last * gamma_last / 6.0;
  out.unclamped = fitted(g - 1) + slope * (1.0 - lambda_grid(g - 1));
  out.pi0 = std::min(1.0, std::max(out.unclamped, 1e-8));
  return out;
}

double estimate_pi0(const Eigen::VectorXd& pvalues,
                    const Eigen::VectorXd& lambda_grid) {
  return estimate_pi0_detail(pvalues, lambda_grid).pi0;
}

double estimate_pi0(const Eigen::VectorXd& pvalues) {
  return estimate_pi0(pvalues, default_lambda_grid());
}

double fdr_at(const Eigen::VectorXd& pvalues, double pi0, double t) {
  if (!(t > 0.0) || t > 1.0)
    throw std::invalid_argument("fdr_at: t must be in (0,1]");
  const int m = static_cast<int>(pvalues.size());
  const int rejected = static_cast<int>((pvalues.array() <= t).count());
  if (rejected == 0) return 1.0;
  return std::min(1.0, m * pi0 * t / rejected);
}

Eigen::VectorXd qvalues(const Eigen::VectorXd& pvalues, double pi0) {
  const int m = static_cast<int>(pvalues.size());
  for (int i = 0; i < m; ++i)
    if (pvalues(i) < 0.0 || pvalues(i) > 1.0)
      throw std::invalid_argument("qvalues: p-values must lie in [0,1]");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pvalues(a) > pvalues(b); });

  Eigen::VectorXd q(m);
  double running = 1.0;
  for (int idx : order) {
    const double t = pvalues(idx);
    const double fdr = t > 0.0 ? fdr_at(pvalues, pi0, t) : 0.0;
    running = std::min(running, fdr);
    q(idx) = running;
  }
  return q;
}

Eigen::VectorXd lfdr(const Eigen::VectorXd& pvalues, double pi0) {
  const int m = static_cast<int>(pvalues.size());
  if (m < 10) throw std::invalid_argument("lfdr: need at least 10 p-values");

  constexpr double eps = 1e-8;
  Eigen::VectorXd s(m);
  for (int i = 0; i < m; ++i)
    s(i) = normal_quantile(std::min(1.0 - eps, std::max(eps, pvalues(i))));

  // Silverman's rule on the probit scale.
  const double mean = s.mean();
  const double sd = std::sqrt((s.array() - mean).square().sum() / (m - 1));
  std::vector<double> sorted(s.data(), s.data() + m);
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (m - 1);
    const int lo = static_cast<int>(pos);
    const int hi = std::min(lo + 1, m - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, 1e-3);
  const double bandwidth = 0.9 * spread * std::pow(m, -0.2);

  Eigen::VectorXd out(m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double density = 0.0;
    for (int k = 0; k < m; ++k) density += normal_pdf((s(i) - s(k)) / bandwidth);
    density /= m * bandwidth;
    const double value = density > 0.0 ? pi0 * normal_pdf(s(i)) / density : 1.0;
    out(i) = std::min(1.0, std::max(0.0, value));
  }

  // Monotone in p: a larger p-value never gets a smaller local fdr. This
  // irons out spurious dips where the kernel density overshoots in the tail.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pvalues(a) < pvalues(b); });
  double running = 0.0;
  for (int idx : order) {
    running = std::max(running, out(idx));
    out(idx) = running;
  }
  return out;
}

SignificanceSet analyze_pvalues(const Eigen::VectorXd& pvalues) {
  SignificanceSet set;
  set.pvalues = pvalues;
  set.lambda_grid = default_lambda_grid();
  const Pi0Estimate est = estimate_pi0_detail(pvalues, set.lambda_grid);
  set.pi0_hat = est.pi0;
  set.pi0_unclamped = est.unclamped;
  set.qvalues = qvalues(pvalues, set.pi0_hat);
  set.lfdr = lfdr(pvalues, set.pi0_hat);
  return set;
}

std::string SignificanceSet::to_json() const {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json j;
  j["pi0_hat"] = pi0_hat;
  j["pi0_unclamped"] = pi0_unclamped;
  j["pvalues"] = vec(pvalues);
  j["qvalues"] = vec(qvalues);
  j["lfdr"] = vec(lfdr);
  j["lambda_grid"] = vec(lambda_grid);
  return j.dump(2);
}

}  // namespace sva
