#include "mpple/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mpple/influence.hpp"
#include "mpple/mpple_fit.hpp"
#include "mpple/rng.hpp"
#include "mpple/stats.hpp"
#include "mpple/step_function.hpp"
#include "mpple/cif.hpp"

namespace mpple {

namespace {

constexpr double kBeta1 = -0.5;
// Scenario 1 (Gompertz cause 2).
constexpr double kBeta2 = 0.5;
constexpr double kNu = 0.2;
// Scenarios 2-4 (Weibull cause 2).
constexpr double kLambdaW = 0.5;
constexpr double kBeta3 = -0.5;

double weibull_eta(int scenario) {
  switch (scenario) {
    case 2:
      return 0.5;
    case 3:
      return 2.0;
    case 4:
      return 0.1;
    default:
      throw ConfigError("scenario must be in 1..4");
  }
}

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void ScenarioConfig::validate() const {
  if (scenario < 1 || scenario > 4) {
    throw ConfigError("scenario must be in 1..4");
  }
  if (n < 2) throw ConfigError("simulation: n must be >= 2");
  if (replicates < 1) throw ConfigError("simulation: replicates must be >= 1");
}

Dataset generate_dataset(const ScenarioConfig& config, int replicate_index) {
  config.validate();
  Rng rng(config.seed, static_cast<std::uint64_t>(replicate_index));

  Dataset ds;
  ds.k = 2;
  ds.covariate_names = {"z1", "z2"};
  ds.tau = config.tau;
  ds.records.reserve(static_cast<std::size_t>(config.n));

  const double eta =
      config.scenario == 1 ? 0.0 : weibull_eta(config.scenario);

  for (int i = 0; i < config.n; ++i) {
    const double z1 = rng.uniform();
    const double z2 = rng.bernoulli(0.5) ? 1.0 : 0.0;

    const double t1 = rng.exponential(std::exp(kBeta1 * z1));
    double t2;
    const double e2 = rng.exponential(1.0);
    if (config.scenario == 1) {
      // Invert Lambda2(t) = exp(-beta2 (z2+1)) (exp(nu t) - 1) / nu.
      const double a = std::exp(-kBeta2 * (z2 + 1.0));
      t2 = std::log1p(kNu * e2 / a) / kNu;
    } else {
      const double rate = std::pow(kLambdaW, eta) * std::exp(kBeta3 * z2);
      t2 = std::pow(e2 / rate, 1.0 / eta);
    }

    const double t_fail = std::min(t1, t2);
    const int cause = t1 <= t2 ? 1 : 2;
    const double u_cens = rng.exponential(config.censoring_rate);
    const double cutoff = std::min(u_cens, config.tau);

    SubjectRecord r;
    r.covariates.resize(2);
    r.covariates << z1, z2;
    r.auxiliaries.resize(0);
    if (t_fail <= cutoff) {
      r.time = t_fail;
      r.event = true;
      const double p_obs =
          expit(config.theta[0] + config.theta[1] * t_fail +
                config.theta[2] * z1 + config.theta[3] * z2);
      if (rng.bernoulli(p_obs)) {
        r.cause_observed = true;
        r.cause = cause;
      } else {
        r.cause_observed = false;
      }
    } else {
      r.time = cutoff;
      r.event = false;
    }
    ds.records.push_back(std::move(r));
  }
  return ds;
}

double true_cumhaz1(double t) { return t; }

double true_cumhaz2(const ScenarioConfig& config, double z2, double t) {
  if (config.scenario == 1) {
    return std::exp(-kBeta2 * (z2 + 1.0)) * std::expm1(kNu * t) / kNu;
  }
  const double eta = weibull_eta(config.scenario);
  return std::pow(kLambdaW, eta) * std::exp(kBeta3 * z2) * std::pow(t, eta);
}

double true_cif1(const ScenarioConfig& config, const Eigen::VectorXd& z0,
                 double t) {
  const double z1 = z0[0];
  const double z2 = z0[1];
  const double haz1 = std::exp(kBeta1 * z1);
  auto integrand = [&](double s) {
    return std::exp(-haz1 * s - true_cumhaz2(config, z2, s)) * haz1;
  };
  // Composite Simpson; the integrand is smooth (scenario 4's eta < 1 gives
  // an integrable singularity in the hazard but not in the integrand).
  const int steps = 4000;
  const double h = t / steps;
  double acc = integrand(0.0) + integrand(t);
  for (int m = 1; m < steps; ++m) {
    acc += integrand(m * h) * (m % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

namespace {

struct ReplicateResult {
  bool ok = false;
  double beta1 = 0.0, se_beta1 = 0.0;
  double lambda1 = 0.0, se_lambda1 = 0.0;
  double f1 = 0.0, se_f1 = 0.0;
  double missing_pct = 0.0, censor_pct = 0.0, cause1_pct = 0.0;
};

int last_index_le(const std::vector<double>& grid, double t) {
  return static_cast<int>(std::upper_bound(grid.begin(), grid.end(), t) -
                          grid.begin()) -
         1;
}

ReplicateResult run_replicate(const ScenarioConfig& config,
                              const StudyOptions& options, int rep) {
  ReplicateResult res;
  const Dataset ds = generate_dataset(config, rep);

  int n_fail = 0, n_missing = 0, n_cause1 = 0, n_cc = 0;
  for (const auto& r : ds.records) {
    if (!r.event) continue;
    ++n_fail;
    if (!r.cause_observed) {
      ++n_missing;
    } else {
      ++n_cc;
      if (*r.cause == 1) ++n_cause1;
    }
  }
  res.censor_pct = 100.0 * (config.n - n_fail) / config.n;
  res.missing_pct = n_fail > 0 ? 100.0 * n_missing / n_fail : 0.0;
  res.cause1_pct = n_cc > 0 ? 100.0 * n_cause1 / n_cc : 0.0;

  try {
    const TermGrammar grammar = TermGrammar::parse(options.working_grammar, ds);
    const MissingnessFit mfit = fit_cause_probability(ds, grammar);
    const CauseSpecificFit cfit = fit_mpple(ds, mfit);
    const BetaInfluence binfl = compute_beta_influence(ds, mfit, cfit, 1);
    res.beta1 = cfit.cause(1).beta[0];
    res.se_beta1 = binfl.se[0];

    if (options.eval_time.has_value()) {
      const double t = *options.eval_time;
      const double n = static_cast<double>(ds.size());
      const CumhazInfluence chinfl =
          compute_cumhaz_influence(ds, mfit, cfit, 1, binfl);
      res.lambda1 = cfit.cause(1).baseline(t);
      const int gi = last_index_le(chinfl.grid, t);
      res.se_lambda1 = gi < 0 ? 0.0 : chinfl.sigma[gi] / std::sqrt(n);

      const BetaInfluence binfl2 = compute_beta_influence(ds, mfit, cfit, 2);
      const CumhazInfluence chinfl2 =
          compute_cumhaz_influence(ds, mfit, cfit, 2, binfl2);
      const CifInfluence cifi = cif_influence(cfit, options.z0,
                                              {binfl, binfl2},
                                              {chinfl, chinfl2});
      const auto curves = predict_cif(cfit, options.z0);
      const int mi = last_index_le(cifi.grid, t);
      if (mi >= 0) {
        res.f1 = curves[0].values[static_cast<std::size_t>(mi)];
        res.se_f1 = cifi.sigma[0][mi] / std::sqrt(n);
      }
    }
    res.ok = true;
  } catch (const std::exception&) {
    res.ok = false;
  }
  return res;
}

MetricRow summarize(const std::string& name, double truth,
                    const std::vector<double>& est,
                    const std::vector<double>& se) {
  MetricRow row;
  row.estimand = name;
  row.truth = truth;
  const int m = static_cast<int>(est.size());
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= m;
  row.bias = mean - truth;
  if (m >= 2) {
    double ss = 0.0;
    for (double e : est) ss += (e - mean) * (e - mean);
    row.mcsd = std::sqrt(ss / (m - 1));
    row.mcsd_defined = true;
  }
  double ase = 0.0, cp = 0.0, mse = 0.0;
  const double zq = normal_quantile(0.975);
  for (int r = 0; r < m; ++r) {
    ase += se[static_cast<std::size_t>(r)];
    const double lo = est[static_cast<std::size_t>(r)] -
                      zq * se[static_cast<std::size_t>(r)];
    const double hi = est[static_cast<std::size_t>(r)] +
                      zq * se[static_cast<std::size_t>(r)];
    if (truth >= lo && truth <= hi) cp += 1.0;
    mse += (est[static_cast<std::size_t>(r)] - truth) *
           (est[static_cast<std::size_t>(r)] - truth);
  }
  row.ase = ase / m;
  row.cp = cp / m;
  row.mse = mse / m;
  return row;
}

}  // namespace

StudySummary run_study(const ScenarioConfig& config,
                       const StudyOptions& options) {
  config.validate();
  const int R = config.replicates;
  std::vector<ReplicateResult> results(static_cast<std::size_t>(R));

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (int r = 0; r < R; ++r) {
      results[static_cast<std::size_t>(r)] = run_replicate(config, options, r);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) {
          results[static_cast<std::size_t>(r)] =
              run_replicate(config, options, r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  StudySummary out;
  std::vector<double> b1, se1, l1, sel1, f1, sef1;
  for (const auto& res : results) {
    out.missing_pct += res.missing_pct / R;
    out.censor_pct += res.censor_pct / R;
    out.cause1_pct += res.cause1_pct / R;
    if (!res.ok) {
      ++out.failed_replicates;
      continue;
    }
    b1.push_back(res.beta1);
    se1.push_back(res.se_beta1);
    if (options.eval_time.has_value()) {
      l1.push_back(res.lambda1);
      sel1.push_back(res.se_lambda1);
      f1.push_back(res.f1);
      sef1.push_back(res.se_f1);
    }
  }
  out.replicates_used = static_cast<int>(b1.size());
  if (out.failed_replicates > 0.02 * R) {
    throw FitError("run_study: more than 2% of replicates failed to fit (" +
                   std::to_string(out.failed_replicates) + "/" +
                   std::to_string(R) + ")");
  }
  if (out.replicates_used == 0) {
    throw FitError("run_study: no successful replicates");
  }

  out.rows.push_back(summarize("beta1", kBeta1, b1, se1));
  if (options.eval_time.has_value()) {
    const double t = *options.eval_time;
    out.rows.push_back(summarize("Lambda1(t)", true_cumhaz1(t), l1, sel1));
    out.rows.push_back(
        summarize("F1(t;z0)", true_cif1(config, options.z0, t), f1, sef1));
  }
  return out;
}

}  // namespace mpple
