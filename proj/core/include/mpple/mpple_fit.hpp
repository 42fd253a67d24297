#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mpple/dataset.hpp"
#include "mpple/missingness.hpp"
#include "mpple/step_function.hpp"

namespace mpple {

/// Imputed failure weights: w(i, j) = R_i D_ij + (1 - R_i) D_i pi_j(W_i).
/// Rows sum to the event indicator; observed causes are point masses.
Eigen::MatrixXd cause_weights(const Dataset& ds, const MissingnessFit& mfit);

/// One cause's converged fit.
struct CauseFit {
  Eigen::VectorXd beta;
  /// Breslow cumulative baseline hazard (jumps at weighted event times).
  StepFunction baseline;
  /// Plug-in H_j: n^-1 times the negative Jacobian of the score sum.
  Eigen::MatrixXd hessian;
  int iterations = 0;
  bool converged = false;

  // Risk-set summaries at the jump grid, kept for the influence-function
  // stage: s0n[g] = n^-1 sum_l Y_l(t_g) exp(beta' Z_l), en.col(g) = the
  // weighted covariate mean E_n(t_g, beta), dlambda[g] the baseline jump.
  std::vector<double> s0n;
  Eigen::MatrixXd en;
  std::vector<double> dlambda;
};

struct CauseSpecificFit {
  std::vector<CauseFit> causes;
  const CauseFit& cause(int j) const {
    return causes[static_cast<std::size_t>(j - 1)];
  }
};

/// Weighted partial-likelihood score and its negative Jacobian at beta,
/// both divided by n. Risk sets use Y(t) = 1{X >= t} with Breslow ties.
void pseudo_score(const Dataset& ds, const Eigen::MatrixXd& weights, int cause,
                  const Eigen::VectorXd& beta, Eigen::VectorXd& score,
                  Eigen::MatrixXd& neg_jacobian);

/// Newton solve per cause from beta = 0 with step-halving on the score norm;
/// converged when the score max-norm drops below 1e-9. Throws FitError on
/// zero total weight for a cause, singular Jacobian, divergence
/// (|beta|_inf > 50), or non-convergence.
CauseSpecificFit fit_mpple(const Dataset& ds, const MissingnessFit& mfit);

/// Same solver on externally supplied weights (used for the no-missingness
/// route where the weights are the observed cause indicators).
CauseSpecificFit fit_weighted(const Dataset& ds,
                              const Eigen::MatrixXd& weights);

/// Cumulative hazard at covariate z0: baseline jumps scaled by
/// exp(beta' z0).
StepFunction cumhaz_at_covariate(const CauseSpecificFit& fit, int cause,
                                 const Eigen::VectorXd& z0);

}  // namespace mpple
