#pragma once

#include <Eigen/Dense>

#include "mpple/dataset.hpp"
#include "mpple/grammar.hpp"

namespace mpple {

/// Fitted cause-probability model. For k = 2 this is a binary logit with one
/// coefficient block; for k > 2, a generalized logit with k-1 blocks and
/// cause k as the reference category. Coefficients are stacked block by
/// block, each block in grammar term order.
struct MissingnessFit {
  Eigen::VectorXd gamma;
  TermGrammar grammar;
  int k = 2;
  /// Total Fisher information at gamma (sum over complete cases).
  Eigen::MatrixXd fisher_info;
  /// Per-subject influence vectors, one row per dataset record; zero rows
  /// for subjects contributing no likelihood term. Scaled so that
  /// n^-1 sum_i omega_i omega_i^T estimates n * Cov(gamma_hat).
  Eigen::MatrixXd omega;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;

  int dim() const { return static_cast<int>(gamma.size()); }
  int block_dim() const { return grammar.dim(); }
};

/// Maximum likelihood on complete-case failures; Fisher scoring with
/// step-halving, convergence when the score max-norm drops below 1e-8.
/// Throws FitError on rank deficiency, separation (|gamma|_inf > 50), a
/// cause with no complete cases, or non-convergence.
MissingnessFit fit_cause_probability(const Dataset& ds,
                                     const TermGrammar& grammar);

/// Cause probabilities pi_j(W, gamma_hat), j = 1..k, at a failure record.
Eigen::VectorXd predict_pi(const MissingnessFit& fit,
                           const SubjectRecord& record, const Dataset& ds);

/// Analytic gradient of pi_j with respect to the full stacked gamma.
Eigen::VectorXd pi_gradient(const MissingnessFit& fit,
                            const SubjectRecord& record, const Dataset& ds,
                            int cause);

/// Per-subject influence vectors I(gamma)^-1 U_i(gamma) for the fitted
/// model, scaled as described on MissingnessFit::omega. Identical to the
/// matrix stored on the fit; exposed for recomputation against other data.
Eigen::MatrixXd influence_omega(const MissingnessFit& fit, const Dataset& ds);

/// Complete-case log-likelihood at an arbitrary gamma (used by the solver
/// and by finite-difference checks).
double cause_probability_loglik(const Dataset& ds, const TermGrammar& grammar,
                                const Eigen::VectorXd& gamma);

}  // namespace mpple
