#include "mpple/influence.hpp"

#include <algorithm>
#include <cmath>

namespace mpple {

namespace {

/// Index of the last grid time <= t, or -1.
int grid_index(const std::vector<double>& grid, double t) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  return static_cast<int>(it - grid.begin()) - 1;
}

}  // namespace

Eigen::VectorXd pointwise_sigma(const Eigen::MatrixXd& influence) {
  const double n = static_cast<double>(influence.rows());
  return (influence.array().square().colwise().sum() / n).sqrt();
}

BetaInfluence compute_beta_influence(const Dataset& ds,
                                     const MissingnessFit& mfit,
                                     const CauseSpecificFit& cfit, int cause) {
  const CauseFit& cf = cfit.cause(cause);
  const int n = static_cast<int>(ds.size());
  const int p = ds.n_covariates();
  const auto& grid = cf.baseline.times();
  const int G = static_cast<int>(grid.size());

  Eigen::LDLT<Eigen::MatrixXd> hinv(cf.hessian);
  const bool h_ok = p == 0 || (hinv.info() == Eigen::Success &&
                               cf.hessian.lpNorm<Eigen::Infinity>() > 0.0);
  if (!h_ok) throw FitError("influence: singular Hessian");

  const Eigen::MatrixXd w = cause_weights(ds, mfit);

  // Cumulative sums over the jump grid.
  std::vector<double> cum_dlambda(static_cast<std::size_t>(G));
  Eigen::MatrixXd cum_e_dlambda = Eigen::MatrixXd::Zero(p, G);
  double acc = 0.0;
  Eigen::VectorXd vacc = Eigen::VectorXd::Zero(p);
  for (int g = 0; g < G; ++g) {
    acc += cf.dlambda[static_cast<std::size_t>(g)];
    vacc += cf.en.col(g) * cf.dlambda[static_cast<std::size_t>(g)];
    cum_dlambda[static_cast<std::size_t>(g)] = acc;
    cum_e_dlambda.col(g) = vacc;
  }

  BetaInfluence out;
  out.psi.resize(n, p);
  out.r_gamma = Eigen::MatrixXd::Zero(p, mfit.dim());

  for (int i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    const Eigen::VectorXd& zi = r.covariates;
    const double ebz = std::exp(cf.beta.dot(zi));
    const int gi = grid_index(grid, r.time);

    Eigen::VectorXd raw = Eigen::VectorXd::Zero(p);
    const double wij = r.event ? w(i, cause - 1) : 0.0;
    if (wij > 0.0) {
      // X_i is a weighted event time, hence on the grid.
      raw += wij * (zi - cf.en.col(gi));
    }
    if (gi >= 0) {
      raw -= ebz * (zi * cum_dlambda[static_cast<std::size_t>(gi)] -
                    cum_e_dlambda.col(gi));
    }
    out.psi.row(i) = hinv.solve(raw).transpose();

    if (r.event && !r.cause_observed) {
      const Eigen::VectorXd pidot = pi_gradient(mfit, r, ds, cause);
      out.r_gamma += (zi - cf.en.col(gi)) * pidot.transpose();
    }
  }
  out.r_gamma /= static_cast<double>(n);
  out.r_gamma = hinv.solve(out.r_gamma).eval();

  out.combined = out.psi + mfit.omega * out.r_gamma.transpose();
  out.sigma = out.combined.transpose() * out.combined / static_cast<double>(n);
  out.se = (out.sigma.diagonal() / static_cast<double>(n)).cwiseSqrt();
  return out;
}

CumhazInfluence compute_cumhaz_influence(const Dataset& ds,
                                         const MissingnessFit& mfit,
                                         const CauseSpecificFit& cfit,
                                         int cause,
                                         const BetaInfluence& beta_infl) {
  const CauseFit& cf = cfit.cause(cause);
  const int n = static_cast<int>(ds.size());
  const int p = ds.n_covariates();
  const auto& grid = cf.baseline.times();
  const int G = static_cast<int>(grid.size());

  const Eigen::MatrixXd w = cause_weights(ds, mfit);

  // cum_c[g] = sum_{g' <= g} dLambda_g' / s0n_g'  (compensator kernel);
  // cum_e_dlambda as in the coefficient influences.
  std::vector<double> cum_c(static_cast<std::size_t>(G));
  Eigen::MatrixXd cum_e_dlambda = Eigen::MatrixXd::Zero(p, G);
  {
    double acc = 0.0;
    Eigen::VectorXd vacc = Eigen::VectorXd::Zero(p);
    for (int g = 0; g < G; ++g) {
      acc += cf.dlambda[static_cast<std::size_t>(g)] /
             cf.s0n[static_cast<std::size_t>(g)];
      vacc += cf.en.col(g) * cf.dlambda[static_cast<std::size_t>(g)];
      cum_c[static_cast<std::size_t>(g)] = acc;
      cum_e_dlambda.col(g) = vacc;
    }
  }

  CumhazInfluence out;
  out.grid = grid;
  out.phi.setZero(n, G);
  out.r_star = Eigen::MatrixXd::Zero(G, mfit.dim());

  for (int i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    const double ebz = std::exp(cf.beta.dot(r.covariates));
    const int gi = grid_index(grid, r.time);
    const double wij = r.event ? w(i, cause - 1) : 0.0;
    const double jump =
        wij > 0.0 ? wij / cf.s0n[static_cast<std::size_t>(gi)] : 0.0;

    // Martingale part: jump at X_i minus the running compensator, frozen
    // after X_i.
    const Eigen::VectorXd e_term =
        cum_e_dlambda.transpose() * beta_infl.combined.row(i).transpose();
    for (int g = 0; g < G; ++g) {
      const int gmin = std::min(g, gi);
      double v = 0.0;
      if (wij > 0.0 && g >= gi) v += jump;
      if (gmin >= 0) v -= ebz * cum_c[static_cast<std::size_t>(gmin)];
      v -= e_term[g];
      out.phi(i, g) = v;
    }

    if (r.event && !r.cause_observed) {
      const Eigen::VectorXd pidot = pi_gradient(mfit, r, ds, cause);
      out.r_star.row(gi) +=
          pidot.transpose() / (cf.s0n[static_cast<std::size_t>(gi)] *
                               static_cast<double>(n));
    }
  }
  // r_star accumulates 1{X_i <= t}; turn per-time rows into running sums.
  for (int g = 1; g < G; ++g) out.r_star.row(g) += out.r_star.row(g - 1);

  out.combined = out.phi + mfit.omega * out.r_star.transpose();
  out.sigma = pointwise_sigma(out.combined);
  return out;
}

Eigen::MatrixXd covariate_cumhaz_influence(const CauseSpecificFit& cfit,
                                           int cause,
                                           const Eigen::VectorXd& z0,
                                           const BetaInfluence& beta_infl,
                                           const CumhazInfluence& ch_infl) {
  const CauseFit& cf = cfit.cause(cause);
  const double scale = std::exp(cf.beta.dot(z0));
  const Eigen::VectorXd a_z0 = beta_infl.combined * z0;  // n
  Eigen::MatrixXd out = ch_infl.combined;
  const auto& lambda = cf.baseline.values();
  for (int g = 0; g < out.cols(); ++g) {
    out.col(g) += a_z0 * lambda[static_cast<std::size_t>(g)];
  }
  return out * scale;
}

CifInfluence cif_influence(const CauseSpecificFit& cfit,
                           const Eigen::VectorXd& z0,
                           const std::vector<BetaInfluence>& beta_infl,
                           const std::vector<CumhazInfluence>& ch_infl) {
  const int k = static_cast<int>(cfit.causes.size());
  const int n = static_cast<int>(beta_infl.front().combined.rows());

  std::vector<double> merged;
  for (int j = 0; j < k; ++j) {
    merged = merge_grids(merged, cfit.causes[static_cast<std::size_t>(j)]
                                     .baseline.times());
  }
  const int M = static_cast<int>(merged.size());

  // Per cause: z0-scaled hazards and influence matrices mapped onto the
  // merged grid (map[m] = index of last cause-grid point <= merged[m]).
  std::vector<StepFunction> lam(static_cast<std::size_t>(k));
  std::vector<Eigen::MatrixXd> phi_a(static_cast<std::size_t>(k));
  std::vector<std::vector<int>> map(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    lam[static_cast<std::size_t>(j)] = cumhaz_at_covariate(cfit, j + 1, z0);
    phi_a[static_cast<std::size_t>(j)] = covariate_cumhaz_influence(
        cfit, j + 1, z0, beta_infl[static_cast<std::size_t>(j)],
        ch_infl[static_cast<std::size_t>(j)]);
    auto& mp = map[static_cast<std::size_t>(j)];
    mp.resize(static_cast<std::size_t>(M));
    const auto& gj = cfit.causes[static_cast<std::size_t>(j)].baseline.times();
    for (int m = 0; m < M; ++m) {
      mp[static_cast<std::size_t>(m)] =
          grid_index(gj, merged[static_cast<std::size_t>(m)]);
    }
  }

  // Survival left limits and hazard jumps on the merged grid. Left limits
  // are values at the strictly previous merged grid point for all causes.
  Eigen::VectorXd s_minus(M);
  Eigen::MatrixXd dlam(M, k);  // z0-scaled jumps per cause
  {
    Eigen::VectorXd total_prev = Eigen::VectorXd::Zero(k);
    for (int m = 0; m < M; ++m) {
      double sum_prev = 0.0;
      for (int j = 0; j < k; ++j) {
        const auto& lj = lam[static_cast<std::size_t>(j)];
        const int gm = map[static_cast<std::size_t>(j)][
            static_cast<std::size_t>(m)];
        const double cur = gm < 0 ? 0.0
                                  : lj.values()[static_cast<std::size_t>(gm)];
        dlam(m, j) = cur - total_prev[j];
        sum_prev += total_prev[j];
        total_prev[j] = cur;
      }
      s_minus[m] = std::exp(-sum_prev);
    }
  }

  CifInfluence out;
  out.grid = merged;
  out.per_cause.assign(static_cast<std::size_t>(k),
                       Eigen::MatrixXd::Zero(n, M));

  // Row-wise recursion per subject. phi_prev[j] holds phi^Lambda_ij at the
  // previous merged grid point (the s- value).
  Eigen::VectorXd phi_prev(k), phi_cur(k), f_acc(k);
  for (int i = 0; i < n; ++i) {
    phi_prev.setZero();
    f_acc.setZero();
    for (int m = 0; m < M; ++m) {
      double phi_sum_prev = 0.0;
      for (int j = 0; j < k; ++j) {
        const int gm = map[static_cast<std::size_t>(j)][
            static_cast<std::size_t>(m)];
        phi_cur[j] = gm < 0 ? 0.0
                            : phi_a[static_cast<std::size_t>(j)](i, gm);
        phi_sum_prev += phi_prev[j];
      }
      for (int j = 0; j < k; ++j) {
        f_acc[j] += s_minus[m] * (phi_cur[j] - phi_prev[j]) -
                    phi_sum_prev * s_minus[m] * dlam(m, j);
        out.per_cause[static_cast<std::size_t>(j)](i, m) = f_acc[j];
      }
      phi_prev = phi_cur;
    }
  }

  out.sigma.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    out.sigma[static_cast<std::size_t>(j)] =
        pointwise_sigma(out.per_cause[static_cast<std::size_t>(j)]);
  }
  return out;
}

double covariance_at(const CumhazInfluence& infl, double t, double s) {
  const int gt = grid_index(infl.grid, t);
  const int gs = grid_index(infl.grid, s);
  if (gt < 0 || gs < 0) return 0.0;
  const double n = static_cast<double>(infl.combined.rows());
  return infl.combined.col(gt).dot(infl.combined.col(gs)) / n;
}

}  // namespace mpple
