#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mpple/dataset.hpp"
#include "mpple/missingness.hpp"
#include "mpple/mpple_fit.hpp"

namespace mpple {

/// Empirical influence decomposition for one cause's coefficient estimate.
/// combined.row(i) is the per-subject influence including the correction for
/// the estimated cause-probability coefficients; sigma is its empirical
/// second moment and se the resulting standard errors (sqrt(diag(sigma)/n)).
struct BetaInfluence {
  Eigen::MatrixXd psi;       // n x p, martingale part
  Eigen::MatrixXd r_gamma;   // p x dim(gamma), correction multiplier
  Eigen::MatrixXd combined;  // n x p, psi + omega * r_gamma^T
  Eigen::MatrixXd sigma;     // p x p
  Eigen::VectorXd se;        // p
};

/// Per-subject influence step functions for the baseline cumulative hazard,
/// stored on the cause's jump grid (right-constant between jumps). The
/// scaling matches the coefficient influences: the pointwise standard error
/// of the estimator at t_g is sigma[g] / sqrt(n).
struct CumhazInfluence {
  std::vector<double> grid;
  Eigen::MatrixXd phi;       // n x G
  Eigen::MatrixXd r_star;    // G x dim(gamma)
  Eigen::MatrixXd combined;  // n x G, phi + omega * r_star^T
  Eigen::VectorXd sigma;     // G
};

/// Influence functions for the covariate-specific CIFs, on the merged jump
/// grid of all causes.
struct CifInfluence {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> per_cause;  // k matrices, each n x M
  std::vector<Eigen::VectorXd> sigma;      // k vectors, length M
};

BetaInfluence compute_beta_influence(const Dataset& ds,
                                     const MissingnessFit& mfit,
                                     const CauseSpecificFit& cfit, int cause);

CumhazInfluence compute_cumhaz_influence(const Dataset& ds,
                                         const MissingnessFit& mfit,
                                         const CauseSpecificFit& cfit,
                                         int cause,
                                         const BetaInfluence& beta_infl);

/// Influence for the cumulative hazard at covariate z0, on the cause grid.
Eigen::MatrixXd covariate_cumhaz_influence(const CauseSpecificFit& cfit,
                                           int cause,
                                           const Eigen::VectorXd& z0,
                                           const BetaInfluence& beta_infl,
                                           const CumhazInfluence& ch_infl);

/// CIF influence functions at z0 for all causes. beta_infl / ch_infl are
/// indexed by cause - 1.
CifInfluence cif_influence(const CauseSpecificFit& cfit,
                           const Eigen::VectorXd& z0,
                           const std::vector<BetaInfluence>& beta_infl,
                           const std::vector<CumhazInfluence>& ch_infl);

/// Pointwise sigma(t) = sqrt(n^-1 sum_i infl_i(t)^2) for an n x G influence
/// matrix.
Eigen::VectorXd pointwise_sigma(const Eigen::MatrixXd& influence);

/// Covariance-function estimate at a pair of times for a cumulative-hazard
/// influence set: n^-1 sum_i infl_i(t) infl_i(s), on the estimator scale
/// (divide by n is already included via the influence scaling convention).
double covariance_at(const CumhazInfluence& infl, double t, double s);

}  // namespace mpple
