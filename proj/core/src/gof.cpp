#include "mpple/gof.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mpple/rng.hpp"

namespace mpple {

namespace {

struct ProcessData {
  std::vector<double> grid;      // unique complete-case failure times
  Eigen::MatrixXd influence;     // n x G per-subject influence terms
  std::vector<double> process;   // observed process on the grid
};

ProcessData build_process(const Dataset& ds, const MissingnessFit& mfit,
                          int cause) {
  const int n = static_cast<int>(ds.size());

  // Complete-case failures sorted by time.
  std::vector<int> cc;
  for (int i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    if (r.event && r.cause_observed) cc.push_back(i);
  }
  std::sort(cc.begin(), cc.end(), [&](int a, int b) {
    return ds.records[static_cast<std::size_t>(a)].time <
           ds.records[static_cast<std::size_t>(b)].time;
  });

  ProcessData pd;
  for (int i : cc) {
    const double t = ds.records[static_cast<std::size_t>(i)].time;
    if (pd.grid.empty() || pd.grid.back() < t) pd.grid.push_back(t);
  }
  const int G = static_cast<int>(pd.grid.size());

  // Residual jumps and the coefficient-correction accumulator
  // C_j(t) = n^-1 sum R_i D_i 1{X_i <= t} pidot_j(W_i).
  pd.process.assign(static_cast<std::size_t>(G), 0.0);
  Eigen::MatrixXd resid = Eigen::MatrixXd::Zero(n, G);
  Eigen::MatrixXd c_acc = Eigen::MatrixXd::Zero(G, mfit.dim());
  for (int i : cc) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    const int g = static_cast<int>(
        std::lower_bound(pd.grid.begin(), pd.grid.end(), r.time) -
        pd.grid.begin());
    const double pij = predict_pi(mfit, r, ds)[cause - 1];
    const double jump = (*r.cause == cause ? 1.0 : 0.0) - pij;
    pd.process[static_cast<std::size_t>(g)] += jump / n;
    resid(i, g) += jump;
    c_acc.row(g) += pi_gradient(mfit, r, ds, cause).transpose() / n;
  }
  for (int g = 1; g < G; ++g) {
    pd.process[static_cast<std::size_t>(g)] +=
        pd.process[static_cast<std::size_t>(g - 1)];
    c_acc.row(g) += c_acc.row(g - 1);
  }
  // Per-subject running residuals.
  for (int g = 1; g < G; ++g) resid.col(g) += resid.col(g - 1);

  pd.influence = resid - mfit.omega * c_acc.transpose();
  return pd;
}

}  // namespace

StepFunction residual_process(const Dataset& ds, const MissingnessFit& mfit,
                              int cause) {
  const auto pd = build_process(ds, mfit, cause);
  return StepFunction(pd.grid, pd.process);
}

GofResult gof_test(const Dataset& ds, const MissingnessFit& mfit, int cause,
                   int replications, double alpha, std::uint64_t seed) {
  if (replications < 100) {
    throw ConfigError("gof: at least 100 replications required");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("gof: alpha must be in (0,1)");
  }

  const auto pd = build_process(ds, mfit, cause);
  const int n = static_cast<int>(ds.size());
  const int G = static_cast<int>(pd.grid.size());
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  GofResult res;
  res.cause = cause;
  res.process = StepFunction(pd.grid, pd.process);
  res.replications = replications;
  res.seed = seed;

  double sup_obs = 0.0;
  for (double v : pd.process) sup_obs = std::max(sup_obs, std::abs(v));
  res.sup_observed = sqrt_n * sup_obs;

  std::vector<double> sups(static_cast<std::size_t>(replications));
  Eigen::VectorXd xi(n);
  int n_ge = 0;
  for (int b = 0; b < replications; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b) + 1);
    for (int i = 0; i < n; ++i) xi[i] = rng.normal();
    const Eigen::VectorXd w = pd.influence.transpose() * xi / sqrt_n;
    const double s = w.cwiseAbs().maxCoeff();
    sups[static_cast<std::size_t>(b)] = s;
    if (s >= res.sup_observed) ++n_ge;
  }
  res.p_value = (1.0 + n_ge) / (replications + 1.0);

  std::sort(sups.begin(), sups.end());
  const int idx = static_cast<int>(
      std::ceil((1.0 - alpha) * static_cast<double>(replications)));
  res.c_alpha = sups[static_cast<std::size_t>(std::max(idx, 1) - 1)];

  std::vector<double> up(static_cast<std::size_t>(G),
                         res.c_alpha / sqrt_n);
  std::vector<double> lo(static_cast<std::size_t>(G),
                         -res.c_alpha / sqrt_n);
  res.band_upper = StepFunction(pd.grid, up);
  res.band_lower = StepFunction(pd.grid, lo);
  return res;
}

}  // namespace mpple
