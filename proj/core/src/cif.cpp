#include "mpple/cif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpple/stats.hpp"

namespace mpple {

std::vector<CifCurve> predict_cif(const CauseSpecificFit& cfit,
                                  const Eigen::VectorXd& z0) {
  const int k = static_cast<int>(cfit.causes.size());

  std::vector<StepFunction> lam(static_cast<std::size_t>(k));
  std::vector<double> merged;
  for (int j = 0; j < k; ++j) {
    lam[static_cast<std::size_t>(j)] = cumhaz_at_covariate(cfit, j + 1, z0);
    merged = merge_grids(merged, lam[static_cast<std::size_t>(j)].times());
  }
  const int M = static_cast<int>(merged.size());

  std::vector<CifCurve> out(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    out[static_cast<std::size_t>(j)].cause = j + 1;
    out[static_cast<std::size_t>(j)].z0 = z0;
    out[static_cast<std::size_t>(j)].grid = merged;
    out[static_cast<std::size_t>(j)].values.assign(
        static_cast<std::size_t>(M), 0.0);
  }

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
  for (int m = 0; m < M; ++m) {
    const double t = merged[static_cast<std::size_t>(m)];
    const double s_minus = std::exp(-prev.sum());
    for (int j = 0; j < k; ++j) {
      const double cur = lam[static_cast<std::size_t>(j)](t);
      acc[j] += s_minus * (cur - prev[j]);
      out[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(m)] =
          acc[j];
      prev[j] = cur;
    }
  }
  return out;
}

std::vector<CifCurve> cif_with_uncertainty(const CauseSpecificFit& cfit,
                                           const CifInfluence& infl,
                                           const Eigen::VectorXd& z0,
                                           double alpha) {
  auto curves = predict_cif(cfit, z0);
  const double zq = normal_quantile(1.0 - alpha / 2.0);
  const double n =
      static_cast<double>(infl.per_cause.front().rows());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t j = 0; j < curves.size(); ++j) {
    auto& c = curves[j];
    const Eigen::VectorXd& sig = infl.sigma[j];
    const std::size_t M = c.grid.size();
    c.se.assign(M, 0.0);
    c.lower_pt.assign(M, nan);
    c.upper_pt.assign(M, nan);
    for (std::size_t m = 0; m < M; ++m) {
      const double se = sig[static_cast<Eigen::Index>(m)] / std::sqrt(n);
      c.se[m] = se;
      const double f = c.values[m];
      if (f <= 0.0 || f >= 1.0 || se <= 0.0) continue;
      // log(-log) scale: g(F) +/- z * se / |F log F|, back-transformed.
      const double gf = std::log(-std::log(f));
      const double sg = se / std::abs(f * std::log(f));
      // g is decreasing in F, so +z maps to the lower limit.
      c.lower_pt[m] = std::exp(-std::exp(gf + zq * sg));
      c.upper_pt[m] = std::exp(-std::exp(gf - zq * sg));
    }
  }
  return curves;
}

}  // namespace mpple
