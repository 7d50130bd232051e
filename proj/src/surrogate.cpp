#include "sva/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "sva/fdr.hpp"
#include "sva/metrics.hpp"
#include "sva/rng.hpp"
#include "sva/special.hpp"

namespace sva {

std::string method_name(Method method) {
  switch (method) {
    case Method::kSva: return "sva";
    case Method::kSvdr: return "svdr";
    case Method::kSvdx: return "svdx";
    case Method::kVanilla: return "vanilla";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "sva") return Method::kSva;
  if (name == "svdr") return Method::kSvdr;
  if (name == "svdx") return Method::kSvdx;
  if (name == "vanilla") return Method::kVanilla;
  throw std::invalid_argument("unknown method name: " + name);
}

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  const double denom = std::sqrt((ac * ac).sum() * (bc * bc).sum());
  return denom > 0.0 ? (ac * bc).sum() / denom : 0.0;
}

double sample_sd(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  const Eigen::ArrayXd c = v.array() - v.mean();
  return std::sqrt((c * c).sum() / (n - 1));
}

// Scale each column to unit sample variance without centering, keeping spans
// and orthogonality relations intact.
Eigen::MatrixXd unit_variance_columns(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd out = A;
  for (int j = 0; j < out.cols(); ++j) {
    const double sd = sample_sd(out.col(j));
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd out = A;
  for (int j = 0; j < out.cols(); ++j) out.col(j).array() -= out.col(j).mean();
  return out;
}

Eigen::MatrixXd intercept_hat(int n) {
  return Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

FactorizationResult empty_factorization(const Eigen::MatrixXd& R) {
  FactorizationResult out;
  out.C_hat.resize(R.rows(), 0);
  out.Lambda.resize(0, R.cols());
  out.E = R;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(R);
  out.singular_values = svd.singularValues();
  out.L_hat = 0;
  out.empty = true;
  return out;
}

}  // namespace

FactorizationResult estimate_c_span(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& Y,
                                    const BasisModel& basis,
                                    const PaConfig& pa) {
  const FitResult fr = fit(basis, X);
  const auto report =
      parallel_analysis(fr.residuals, basis.H, pa.B, pa.alpha, pa.seed);
  if (report.L_hat == 0) return empty_factorization(fr.residuals);
  return svd_factorize(fr.residuals, report.L_hat, SvdMode::kLeft);
}

std::vector<int> find_signature(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& c_l,
                                const SelectorConfig& selector,
                                const Eigen::VectorXd* y_effect) {
  const int n = static_cast<int>(X.rows());
  const int J = static_cast<int>(X.cols());
  if (c_l.size() != n) throw std::invalid_argument("find_signature: size mismatch");
  if (sample_sd(c_l) <= 0.0)
    throw std::invalid_argument("find_signature: constant factor estimate");

  int p = 2;
  Eigen::MatrixXd design(n, selector.adjust_for_y && y_effect ? 3 : 2);
  design.col(0).setOnes();
  design.col(1) = c_l;
  if (design.cols() == 3) {
    design.col(2) = *y_effect;
    p = 3;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd beta = qr.solve(X);  // p x J
  const Eigen::MatrixXd resid = X - design * beta;
  const double inv_gram_cc =
      (design.transpose() * design).inverse()(1, 1);

  Eigen::VectorXd pvals(J);
  for (int j = 0; j < J; ++j) {
    const double sigma2 = resid.col(j).squaredNorm() / (n - p);
    const double se = std::sqrt(sigma2 * inv_gram_cc);
    const double t = se > 0.0 ? beta(1, j) / se : 0.0;
    pvals(j) = se > 0.0 ? t_twosided_p(t, n - p) : 0.0;
  }

  double pi0 = 1.0;
  bool use_lfdr = selector.selector == Selector::kLfdr && J >= 10;
  if (J >= 10) {
    const Pi0Estimate est = estimate_pi0_detail(pvals, default_lambda_grid());
    pi0 = est.pi0;
    // Invalid distributions (p-values piled toward 1) give no signature.
    if (est.unclamped > 1.0 && ks_uniform(pvals).second < 0.01) return {};
  }

  std::vector<int> signature;
  if (use_lfdr) {
    const Eigen::VectorXd local = lfdr(pvals, pi0);
    for (int j = 0; j < J; ++j)
      if (local(j) < selector.alpha) signature.push_back(j);
  } else {
    const double alpha_q =
        selector.selector == Selector::kQvalue ? selector.alpha : 0.1;
    const Eigen::VectorXd q = qvalues(pvals, pi0);
    for (int j = 0; j < J; ++j)
      if (q(j) <= alpha_q) signature.push_back(j);
  }
  return signature;
}

SurrogateSet build_surrogates_sva(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& Y,
                                  const BasisModel& basis, const PaConfig& pa,
                                  const SelectorConfig& selector) {
  return sva_from_span(X, estimate_c_span(X, Y, basis, pa), pa, selector);
}

SurrogateSet sva_from_span(const Eigen::MatrixXd& X,
                           const FactorizationResult& span, const PaConfig& pa,
                           const SelectorConfig& selector) {
  const int n = static_cast<int>(X.rows());
  SurrogateSet set;
  set.method = Method::kSva;
  set.H_hat.resize(n, 0);

  set.source_factors = span.C_hat;
  if (span.empty) return set;

  std::vector<Eigen::VectorXd> surrogates;
  for (int l = 0; l < span.L_hat; ++l) {
    const auto signature = find_signature(X, span.C_hat.col(l), selector);
    if (signature.empty()) continue;

    Eigen::MatrixXd enriched(n, signature.size());
    for (std::size_t s = 0; s < signature.size(); ++s)
      enriched.col(static_cast<int>(s)) = X.col(signature[s]);
    enriched = center_columns(enriched);

    PaConfig sub = pa;
    sub.seed = Rng::derive(pa.seed, 1000 + static_cast<std::uint64_t>(l));
    int count = 1;
    try {
      const auto report =
          parallel_analysis(enriched, intercept_hat(n), sub.B, sub.alpha, sub.seed);
      count = std::max(1, report.L_hat);
    } catch (const std::domain_error&) {
      continue;  // degenerate enriched matrix
    }
    count = std::min<int>(count, std::min<int>(n, static_cast<int>(signature.size())));

    const FactorizationResult fact =
        svd_factorize(enriched, count, SvdMode::kLeft);
    int best = 0;
    double best_abs = -1.0;
    for (int i = 0; i < fact.L_hat; ++i) {
      const double a = std::abs(pearson(span.C_hat.col(l), fact.C_hat.col(i)));
      if (a > best_abs + 1e-15) {
        best_abs = a;
        best = i;
      }
    }
    Eigen::VectorXd h = fact.C_hat.col(best);
    const double sd = sample_sd(h);
    if (sd > 0.0) h /= sd;
    surrogates.push_back(h);
    set.signature_sizes.push_back(static_cast<int>(signature.size()));
    set.selected_factor.push_back(best);
  }

  set.H_hat.resize(n, static_cast<int>(surrogates.size()));
  for (std::size_t i = 0; i < surrogates.size(); ++i)
    set.H_hat.col(static_cast<int>(i)) = surrogates[i];
  return set;
}

SurrogateSet build_surrogates_svdr(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& Y,
                                   const BasisModel& basis, const PaConfig& pa) {
  return svdr_from_span(estimate_c_span(X, Y, basis, pa));
}

SurrogateSet svdr_from_span(const FactorizationResult& span) {
  SurrogateSet set;
  set.method = Method::kSvdr;
  set.source_factors = span.C_hat;
  set.H_hat = unit_variance_columns(span.C_hat);
  return set;
}

SurrogateSet build_surrogates_svdx(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& Y, const PaConfig& pa) {
  const int n = static_cast<int>(X.rows());
  SurrogateSet set;
  set.method = Method::kSvdx;
  set.H_hat.resize(n, 0);

  const Eigen::MatrixXd centered = center_columns(X);
  const auto report =
      parallel_analysis(centered, intercept_hat(n), pa.B, pa.alpha, pa.seed);
  if (report.L_hat == 0) return set;

  const FactorizationResult fact =
      svd_factorize(centered, report.L_hat, SvdMode::kLeft);
  set.source_factors = fact.C_hat;

  int drop = 0;
  double best_abs = -1.0;
  for (int i = 0; i < fact.L_hat; ++i) {
    const double a = std::abs(pearson(fact.C_hat.col(i), Y));
    if (a > best_abs + 1e-15) {
      best_abs = a;
      drop = i;
    }
  }
  set.selected_factor.push_back(drop);

  set.H_hat.resize(n, fact.L_hat - 1);
  int out = 0;
  for (int i = 0; i < fact.L_hat; ++i)
    if (i != drop) set.H_hat.col(out++) = fact.C_hat.col(i);
  set.H_hat = unit_variance_columns(set.H_hat);
  return set;
}

SurrogateSet vanilla_surrogates(int n) {
  SurrogateSet set;
  set.method = Method::kVanilla;
  set.H_hat.resize(n, 0);
  return set;
}

MethodFit fit_method(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                     const BasisModel& basis, const SurrogateSet& surrogates) {
  const int n = basis.n();
  const int p = basis.p();
  if (X.rows() != n || surrogates.H_hat.rows() != n)
    throw std::invalid_argument("fit_method: row count mismatch");
  const int J = static_cast<int>(X.cols());

  // Keep only surrogate columns that add rank on top of the basis block.
  Eigen::HouseholderQR<Eigen::MatrixXd> basis_qr(basis.Phi);
  Eigen::MatrixXd ortho =
      basis_qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  std::vector<int> kept;
  for (int s = 0; s < surrogates.H_hat.cols(); ++s) {
    Eigen::VectorXd col = surrogates.H_hat.col(s);
    const double norm0 = col.norm();
    col -= ortho * (ortho.transpose() * col);
    if (col.norm() > 1e-8 * std::max(1.0, norm0)) {
      kept.push_back(s);
      ortho.conservativeResize(Eigen::NoChange, ortho.cols() + 1);
      ortho.col(ortho.cols() - 1) = col / col.norm();
    }
  }

  const int k = static_cast<int>(kept.size());
  Eigen::MatrixXd design(n, p + k);
  design.leftCols(p) = basis.Phi;
  for (int s = 0; s < k; ++s) design.col(p + s) = surrogates.H_hat.col(kept[s]);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd coeffs = qr.solve(X);  // (p + k) x J
  const Eigen::MatrixXd resid = X - design * coeffs;

  // Reduced design for the partial F-test of the polynomial block: the
  // surrogates plus the intercept when the basis carries one.
  const bool intercept = basis.include_intercept;
  const int q = p - (intercept ? 1 : 0);
  Eigen::MatrixXd reduced(n, (intercept ? 1 : 0) + k);
  int rc = 0;
  if (intercept) reduced.col(rc++).setOnes();
  for (int s = 0; s < k; ++s) reduced.col(rc++) = surrogates.H_hat.col(kept[s]);

  Eigen::MatrixXd resid0;
  if (reduced.cols() > 0) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr0(reduced);
    resid0 = X - reduced * qr0.solve(X);
  } else {
    resid0 = X;
  }

  MethodFit outcome;
  outcome.method = surrogates.method;
  outcome.surrogates = surrogates;
  outcome.dropped_surrogates =
      static_cast<int>(surrogates.H_hat.cols()) - k;
  outcome.fallback_vanilla =
      surrogates.method == Method::kSva && surrogates.H_hat.cols() == 0;
  outcome.fhat_coeffs = coeffs.topRows(p).transpose();

  outcome.pvalues.resize(J);
  const int df2 = n - p - k;
  for (int j = 0; j < J; ++j) {
    if (q == 0 || df2 <= 0) {
      outcome.pvalues(j) = 1.0;
      continue;
    }
    const double ssr1 = resid.col(j).squaredNorm();
    const double ssr0 = resid0.col(j).squaredNorm();
    if (ssr1 <= 0.0) {
      outcome.pvalues(j) = 0.0;
      continue;
    }
    const double fstat = ((ssr0 - ssr1) / q) / (ssr1 / df2);
    outcome.pvalues(j) = f_sf(fstat, q, df2);
  }
  return outcome;
}

std::string MethodFit::to_json() const {
  nlohmann::json j;
  j["method"] = method_name(method);
  j["dropped_surrogates"] = dropped_surrogates;
  j["fallback_vanilla"] = fallback_vanilla;
  j["k_hat"] = static_cast<int>(surrogates.H_hat.cols());
  j["signature_sizes"] = surrogates.signature_sizes;
  j["selected_factor"] = surrogates.selected_factor;
  j["pvalues"] = std::vector<double>(pvalues.data(), pvalues.data() + pvalues.size());
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < fhat_coeffs.rows(); ++r) {
    std::vector<double> row(fhat_coeffs.cols());
    for (int c = 0; c < fhat_coeffs.cols(); ++c) row[c] = fhat_coeffs(r, c);
    rows.push_back(row);
  }
  j["fhat_coeffs"] = rows;
  return j.dump(2);
}

}  // namespace sva
