#include "mpple/mpple_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mpple {

Eigen::MatrixXd cause_weights(const Dataset& ds, const MissingnessFit& mfit) {
  if (!mfit.converged) {
    throw FitError("cause_weights: missingness fit not converged");
  }
  const int n = static_cast<int>(ds.size());
  const int k = ds.k;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, k);
  for (int i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    if (!r.event) continue;
    if (r.cause_observed) {
      w(i, *r.cause - 1) = 1.0;
    } else {
      w.row(i) = predict_pi(mfit, r, ds).transpose();
    }
  }
  return w;
}

namespace {

struct SortedData {
  std::vector<int> order;  // record indices, time ascending
  Eigen::MatrixXd z;       // n x p
  explicit SortedData(const Dataset& ds) {
    const int n = static_cast<int>(ds.size());
    const int p = ds.n_covariates();
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return ds.records[static_cast<std::size_t>(a)].time <
             ds.records[static_cast<std::size_t>(b)].time;
    });
    z.resize(n, p);
    for (int i = 0; i < n; ++i) {
      z.row(i) = ds.records[static_cast<std::size_t>(i)].covariates.transpose();
    }
  }
};

/// One backward sweep over the sorted data: accumulates risk-set sums and
/// visits each weighted event time in descending order.
/// visit(t, d, zsum, s0, s1, s2) receives the weighted event count d and the
/// weighted covariate total zsum at t, plus the risk-set sums at t.
template <typename Visitor>
void sweep(const Dataset& ds, const SortedData& sd,
           const Eigen::VectorXd& wj, const Eigen::VectorXd& beta,
           Visitor&& visit) {
  const int n = static_cast<int>(ds.size());
  const int p = static_cast<int>(beta.size());
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  int pos = n - 1;
  while (pos >= 0) {
    const double t = ds.records[static_cast<std::size_t>(sd.order[
        static_cast<std::size_t>(pos)])].time;
    double d = 0.0;
    Eigen::VectorXd zsum = Eigen::VectorXd::Zero(p);
    // Everyone with X == t enters the risk set before the failures at t are
    // processed (Y(t) = 1{X >= t}; Breslow ties).
    while (pos >= 0) {
      const int i = sd.order[static_cast<std::size_t>(pos)];
      const auto& r = ds.records[static_cast<std::size_t>(i)];
      if (r.time != t) break;
      const double risk = std::exp(beta.dot(sd.z.row(i)));
      s0 += risk;
      s1 += risk * sd.z.row(i).transpose();
      s2 += risk * sd.z.row(i).transpose() * sd.z.row(i);
      if (r.event && wj[i] > 0.0) {
        d += wj[i];
        zsum += wj[i] * sd.z.row(i).transpose();
      }
      --pos;
    }
    if (d > 0.0) visit(t, d, zsum, s0, s1, s2);
  }
}

void score_at(const Dataset& ds, const SortedData& sd,
              const Eigen::VectorXd& wj, const Eigen::VectorXd& beta,
              Eigen::VectorXd& score, Eigen::MatrixXd& neg_jacobian) {
  const int n = static_cast<int>(ds.size());
  const int p = static_cast<int>(beta.size());
  score.setZero(p);
  neg_jacobian.setZero(p, p);
  sweep(ds, sd, wj, beta,
        [&](double, double d, const Eigen::VectorXd& zsum, double s0,
            const Eigen::VectorXd& s1, const Eigen::MatrixXd& s2) {
          const Eigen::VectorXd e = s1 / s0;
          score += zsum - d * e;
          neg_jacobian += d * (s2 / s0 - e * e.transpose());
        });
  score /= n;
  neg_jacobian /= n;
}

CauseFit fit_one_cause(const Dataset& ds, const SortedData& sd,
                       const Eigen::VectorXd& wj, int cause) {
  const int n = static_cast<int>(ds.size());
  const int p = ds.n_covariates();
  constexpr double kTol = 1e-9;
  constexpr int kMaxIter = 100;
  constexpr int kMaxHalvings = 30;
  constexpr double kDivergenceBound = 50.0;

  if (wj.sum() <= 0.0) {
    throw FitError("fit_mpple: zero total failure weight for cause " +
                   std::to_string(cause));
  }

  CauseFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd score(p);
  Eigen::MatrixXd njac(p, p);

  score_at(ds, sd, wj, beta, score, njac);
  const bool degenerate = p == 0 || njac.lpNorm<Eigen::Infinity>() == 0.0;
  if (degenerate) {
    // Constant-zero covariates: the score vanishes identically; keep beta=0.
    fit.converged = true;
  } else {
    Eigen::LDLT<Eigen::MatrixXd> check(njac);
    if (check.info() != Eigen::Success || !check.isPositive()) {
      throw FitError(
          "fit_mpple: covariates constant within weighted failures for "
          "cause " +
          std::to_string(cause));
    }
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
      const double norm = score.lpNorm<Eigen::Infinity>();
      if (norm < kTol) {
        fit.converged = true;
        break;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(njac);
      if (ldlt.info() != Eigen::Success) {
        throw FitError("fit_mpple: singular Jacobian for cause " +
                       std::to_string(cause));
      }
      Eigen::VectorXd step = ldlt.solve(score);
      Eigen::VectorXd cand;
      int halving = 0;
      for (; halving <= kMaxHalvings; ++halving) {
        cand = beta + step;
        score_at(ds, sd, wj, cand, score, njac);
        if (score.lpNorm<Eigen::Infinity>() <= norm || halving == kMaxHalvings)
          break;
        step *= 0.5;
      }
      beta = cand;
      if (beta.lpNorm<Eigen::Infinity>() > kDivergenceBound) {
        throw FitError("fit_mpple: diverging coefficients for cause " +
                       std::to_string(cause) + " (monotone likelihood)");
      }
    }
    fit.iterations = iter;
    if (!fit.converged) {
      throw FitError("fit_mpple: no convergence for cause " +
                     std::to_string(cause));
    }
    score_at(ds, sd, wj, beta, score, njac);
  }

  fit.beta = beta;
  fit.hessian = njac;

  // Breslow baseline and risk-set summaries on the jump grid.
  std::vector<double> times, djs, s0ns;
  std::vector<Eigen::VectorXd> ens;
  sweep(ds, sd, wj, beta,
        [&](double t, double d, const Eigen::VectorXd&, double s0,
            const Eigen::VectorXd& s1, const Eigen::MatrixXd&) {
          times.push_back(t);
          djs.push_back(d / s0);
          s0ns.push_back(s0 / n);
          ens.push_back(s1 / s0);
        });
  std::reverse(times.begin(), times.end());
  std::reverse(djs.begin(), djs.end());
  std::reverse(s0ns.begin(), s0ns.end());
  std::reverse(ens.begin(), ens.end());

  std::vector<double> cum(times.size());
  double acc = 0.0;
  for (std::size_t g = 0; g < times.size(); ++g) {
    acc += djs[g];
    cum[g] = acc;
  }
  fit.baseline = StepFunction(times, cum);
  fit.dlambda = std::move(djs);
  fit.s0n = std::move(s0ns);
  fit.en.resize(p, static_cast<Eigen::Index>(ens.size()));
  for (std::size_t g = 0; g < ens.size(); ++g) {
    fit.en.col(static_cast<Eigen::Index>(g)) = ens[g];
  }
  return fit;
}

}  // namespace

void pseudo_score(const Dataset& ds, const Eigen::MatrixXd& weights, int cause,
                  const Eigen::VectorXd& beta, Eigen::VectorXd& score,
                  Eigen::MatrixXd& neg_jacobian) {
  const SortedData sd(ds);
  score_at(ds, sd, weights.col(cause - 1), beta, score, neg_jacobian);
}

CauseSpecificFit fit_weighted(const Dataset& ds,
                              const Eigen::MatrixXd& weights) {
  const SortedData sd(ds);
  CauseSpecificFit out;
  for (int j = 1; j <= ds.k; ++j) {
    out.causes.push_back(fit_one_cause(ds, sd, weights.col(j - 1), j));
  }
  return out;
}

CauseSpecificFit fit_mpple(const Dataset& ds, const MissingnessFit& mfit) {
  return fit_weighted(ds, cause_weights(ds, mfit));
}

StepFunction cumhaz_at_covariate(const CauseSpecificFit& fit, int cause,
                                 const Eigen::VectorXd& z0) {
  const CauseFit& cf = fit.cause(cause);
  const double scale = std::exp(cf.beta.dot(z0));
  std::vector<double> values = cf.baseline.values();
  for (auto& v : values) v *= scale;
  return StepFunction(cf.baseline.times(), std::move(values));
}

}  // namespace mpple
