#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sva/basis.hpp"
#include "sva/factorize.hpp"

namespace sva {

enum class Method { kSva, kSvdr, kSvdx, kVanilla };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

enum class Selector { kLfdr, kQvalue };

struct SelectorConfig {
  Selector selector = Selector::kLfdr;
  double alpha = 0.5;  // lfdr posterior cutoff; use 0.1 with the q-value selector
  bool adjust_for_y = false;  // also regress out the fitted y-effect (variant)
};

struct SurrogateSet {
  Eigen::MatrixXd H_hat;           // n x K_hat, columns scaled to sample variance 1
  Method method = Method::kVanilla;
  Eigen::MatrixXd source_factors;  // estimated c-span (n x L_hat), may be empty
  std::vector<int> signature_sizes;   // |S_l| per retained surrogate
  std::vector<int> selected_factor;   // argmax factor index i* per surrogate
};

// Step 1 of the pipeline: residuals of the polynomial fit, factor count from
// parallel analysis, left SVD. A zero count gives an empty factorization with
// the `empty` flag set.
FactorizationResult estimate_c_span(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& Y,
                                    const BasisModel& basis,
                                    const PaConfig& pa);

// Features significantly associated with the factor estimate c_l: per-feature
// simple regression with intercept, t-test, then the configured selector. An
// invalid p-value distribution (raw pi0 above 1 and uniformity rejected)
// returns the empty set.
std::vector<int> find_signature(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& c_l,
                                const SelectorConfig& selector,
                                const Eigen::VectorXd* y_effect = nullptr);

SurrogateSet build_surrogates_sva(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& Y,
                                  const BasisModel& basis, const PaConfig& pa,
                                  const SelectorConfig& selector);

// Same pipeline starting from an already computed c-span estimate.
SurrogateSet sva_from_span(const Eigen::MatrixXd& X,
                           const FactorizationResult& span, const PaConfig& pa,
                           const SelectorConfig& selector);

// Residual-space factors used directly as surrogates.
SurrogateSet build_surrogates_svdr(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& Y,
                                   const BasisModel& basis, const PaConfig& pa);

SurrogateSet svdr_from_span(const FactorizationResult& span);

// Factors of the centered observation matrix, minus the one most correlated
// with y.
SurrogateSet build_surrogates_svdx(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& Y, const PaConfig& pa);

SurrogateSet vanilla_surrogates(int n);

struct MethodFit {
  Method method = Method::kVanilla;
  Eigen::MatrixXd fhat_coeffs;  // J x p, basis-block coefficients
  Eigen::VectorXd pvalues;      // per-feature partial F-test of the basis block
  SurrogateSet surrogates;
  int dropped_surrogates = 0;   // collinear columns removed from the design
  bool fallback_vanilla = false;

  std::string to_json() const;
};

MethodFit fit_method(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                     const BasisModel& basis, const SurrogateSet& surrogates);

}  // namespace sva
