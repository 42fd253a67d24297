#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mpple/influence.hpp"
#include "mpple/mpple_fit.hpp"
#include "mpple/step_function.hpp"

namespace mpple {

/// Covariate-specific cumulative incidence curve on the merged jump grid of
/// all causes, optionally with pointwise standard errors and log(-log)-scale
/// confidence intervals. Pointwise CIs are absent (NaN) wherever the curve
/// is 0 (the transform is undefined there).
struct CifCurve {
  int cause = 1;
  Eigen::VectorXd z0;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> se;        // empty unless uncertainty was requested
  std::vector<double> lower_pt;  // pointwise CI limits
  std::vector<double> upper_pt;
};

/// Plug-in CIF estimates at z0 for all causes: discrete product-limit sum
/// F_j(t) = sum_{s<=t} exp(-sum_l Lambda_l(s-)) dLambda_j(s), with left
/// limits taken at the previous merged grid point.
std::vector<CifCurve> predict_cif(const CauseSpecificFit& cfit,
                                  const Eigen::VectorXd& z0);

/// CIF curves with pointwise SEs and 1-alpha CIs on the log(-log) scale.
std::vector<CifCurve> cif_with_uncertainty(const CauseSpecificFit& cfit,
                                           const CifInfluence& infl,
                                           const Eigen::VectorXd& z0,
                                           double alpha);

}  // namespace mpple
