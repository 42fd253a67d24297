#include "mpple/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpple/errors.hpp"
#include "mpple/rng.hpp"

namespace mpple {

void BandRequest::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("band: alpha must be in (0,1)");
  }
  if (replications < 100) {
    throw ConfigError("band: at least 100 multiplier replications required");
  }
  if (!(clip_lower > 0.0 && clip_lower < clip_upper && clip_upper < 1.0)) {
    throw ConfigError("band: clip bounds must satisfy 0 < c1 < c2 < 1");
  }
}

double multiplier_sup(const Eigen::MatrixXd& influence,
                      const std::vector<int>& domain_cols,
                      const Eigen::VectorXd& q, const Eigen::VectorXd& g_deriv,
                      int replications, double alpha, std::uint64_t seed,
                      bool* degenerate) {
  const int n = static_cast<int>(influence.rows());
  const int D = static_cast<int>(domain_cols.size());
  if (D == 0) throw FitError("band: empty band domain");

  Eigen::MatrixXd sub(n, D);
  for (int d = 0; d < D; ++d) {
    sub.col(d) = influence.col(domain_cols[static_cast<std::size_t>(d)]);
  }
  if (sub.lpNorm<Eigen::Infinity>() == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;

  // One deterministic stream per replication, so results are independent of
  // any parallel chunking of b.
  const Eigen::VectorXd wgt = q.cwiseProduct(g_deriv.cwiseAbs());
  std::vector<double> sups(static_cast<std::size_t>(replications));
  Eigen::VectorXd xi(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int b = 0; b < replications; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b) + 1);
    for (int i = 0; i < n; ++i) xi[i] = rng.normal();
    const Eigen::VectorXd w = sub.transpose() * xi * inv_sqrt_n;
    sups[static_cast<std::size_t>(b)] =
        (w.cwiseProduct(wgt)).cwiseAbs().maxCoeff();
  }
  std::sort(sups.begin(), sups.end());
  const int idx = static_cast<int>(
      std::ceil((1.0 - alpha) * static_cast<double>(replications)));
  return sups[static_cast<std::size_t>(std::max(idx, 1) - 1)];
}

namespace {

/// Grid indices within the domain rule, restricted to points where the
/// transform is defined (value > 0 when on the log scale) and sigma > 0.
std::vector<int> clip_domain(const std::vector<double>& values,
                             const Eigen::VectorXd& sigma,
                             const BandRequest& req, bool cif_scale) {
  const int G = static_cast<int>(values.size());
  std::vector<int> usable;
  for (int g = 0; g < G; ++g) {
    const double v = values[static_cast<std::size_t>(g)];
    const bool ok = cif_scale ? (v > 0.0 && v < 1.0) : v > 0.0;
    if (ok && sigma[g] > 0.0) usable.push_back(g);
  }
  if (usable.empty()) throw FitError("band: empty band domain");
  if (req.domain_rule == DomainRule::EventRange) return usable;

  // Nearest grid solutions of c_l = sigma^2 / (1 + sigma^2).
  auto nearest = [&](double target) {
    int best = usable.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (int g : usable) {
      const double s2 = sigma[g] * sigma[g];
      const double d = std::abs(s2 / (1.0 + s2) - target);
      if (d < best_d) {
        best_d = d;
        best = g;
      }
    }
    return best;
  };
  const int lo = nearest(req.clip_lower);
  const int hi = nearest(req.clip_upper);
  std::vector<int> out;
  for (int g : usable) {
    if (g >= lo && g <= hi) out.push_back(g);
  }
  if (out.empty()) throw FitError("band: empty band domain after clipping");
  return out;
}

}  // namespace

Band band_cumhaz_at(const StepFunction& curve,
                    const Eigen::MatrixXd& influence,
                    const BandRequest& request) {
  request.validate();
  const Eigen::VectorXd sigma = pointwise_sigma(influence);
  const auto domain = clip_domain(curve.values(), sigma, request, false);
  const int D = static_cast<int>(domain.size());
  const double n = static_cast<double>(influence.rows());

  Eigen::VectorXd q(D), gd(D);
  for (int d = 0; d < D; ++d) {
    const double lam =
        curve.values()[static_cast<std::size_t>(domain[
            static_cast<std::size_t>(d)])];
    const double s = sigma[domain[static_cast<std::size_t>(d)]];
    q[d] = request.weight == BandWeight::EqualPrecision ? lam / s
                                                        : lam / (1.0 + s * s);
    gd[d] = 1.0 / lam;  // g = log
  }

  Band band;
  band.replications_used = request.replications;
  band.c_alpha =
      multiplier_sup(influence, domain, q, gd, request.replications,
                     request.alpha, request.seed, &band.degenerate);
  for (int d = 0; d < D; ++d) {
    const int g = domain[static_cast<std::size_t>(d)];
    const double lam = curve.values()[static_cast<std::size_t>(g)];
    const double half = band.c_alpha / (std::sqrt(n) * q[d]);
    band.grid.push_back(curve.times()[static_cast<std::size_t>(g)]);
    band.lower.push_back(lam * std::exp(-half));
    band.upper.push_back(lam * std::exp(half));
  }
  return band;
}

Band band_cumhaz(const CauseSpecificFit& cfit, int cause,
                 const CumhazInfluence& infl, const BandRequest& request) {
  return band_cumhaz_at(cfit.cause(cause).baseline, infl.combined, request);
}

Band band_cif(const CifCurve& curve, const CifInfluence& infl,
              const BandRequest& request) {
  request.validate();
  const auto& mat =
      infl.per_cause[static_cast<std::size_t>(curve.cause - 1)];
  const Eigen::VectorXd sigma = pointwise_sigma(mat);
  const auto domain = clip_domain(curve.values, sigma, request, true);
  const int D = static_cast<int>(domain.size());
  const double n = static_cast<double>(mat.rows());

  Eigen::VectorXd q(D), gd(D);
  for (int d = 0; d < D; ++d) {
    const int g = domain[static_cast<std::size_t>(d)];
    const double f = curve.values[static_cast<std::size_t>(g)];
    const double s = sigma[g];
    const double flogf = std::abs(f * std::log(f));
    q[d] = request.weight == BandWeight::EqualPrecision
               ? flogf / s
               : flogf / (1.0 + s * s);
    gd[d] = 1.0 / flogf;  // |d/dF log(-log F)|
  }

  Band band;
  band.replications_used = request.replications;
  band.c_alpha = multiplier_sup(mat, domain, q, gd, request.replications,
                                request.alpha, request.seed, &band.degenerate);
  for (int d = 0; d < D; ++d) {
    const int g = domain[static_cast<std::size_t>(d)];
    const double f = curve.values[static_cast<std::size_t>(g)];
    const double gf = std::log(-std::log(f));
    const double half = band.c_alpha / (std::sqrt(n) * q[d]);
    band.grid.push_back(curve.grid[static_cast<std::size_t>(g)]);
    // g is decreasing in F: +half maps to the lower limit.
    band.lower.push_back(std::exp(-std::exp(gf + half)));
    band.upper.push_back(std::exp(-std::exp(gf - half)));
  }
  return band;
}

}  // namespace mpple
