#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mpple/cif.hpp"
#include "mpple/influence.hpp"

namespace mpple {

enum class BandWeight { EqualPrecision, HallWellner };

enum class DomainRule { EventRange, QuantileClip };

struct BandRequest {
  double alpha = 0.05;
  BandWeight weight = BandWeight::EqualPrecision;
  int replications = 1000;  // multiplier draws
  DomainRule domain_rule = DomainRule::QuantileClip;
  double clip_lower = 0.1;
  double clip_upper = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Simultaneous band on a sub-grid [t1, t2] of the estimator's jump grid.
struct Band {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;
  double c_alpha = 0.0;
  int replications_used = 0;
  bool degenerate = false;  // all-zero influence
};

/// Critical value for the supremum of the multiplier process
/// |q(t) gdot(t) n^{-1/2} sum_i infl_i(t) xi_i| over the given columns of
/// the influence matrix. Returns the ceil((1-alpha) B)-th order statistic.
double multiplier_sup(const Eigen::MatrixXd& influence,
                      const std::vector<int>& domain_cols,
                      const Eigen::VectorXd& q, const Eigen::VectorXd& g_deriv,
                      int replications, double alpha, std::uint64_t seed,
                      bool* degenerate = nullptr);

/// Simultaneous band for the baseline cumulative hazard of one cause,
/// log-transformed so the limits stay positive.
Band band_cumhaz(const CauseSpecificFit& cfit, int cause,
                 const CumhazInfluence& infl, const BandRequest& request);

/// Same construction for the cumulative hazard at covariate z0 (the z0-
/// specific influence matrix and the z0-scaled curve are supplied).
Band band_cumhaz_at(const StepFunction& curve,
                    const Eigen::MatrixXd& influence,
                    const BandRequest& request);

/// Simultaneous band for one cause's CIF at z0, on the log(-log) scale.
Band band_cif(const CifCurve& curve, const CifInfluence& infl,
              const BandRequest& request);

}  // namespace mpple
