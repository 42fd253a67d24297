#include <doctest.h>

#include <cmath>

#include "mpple/cif.hpp"
#include "test_util.hpp"

using namespace mpple;
using namespace mpple::testutil;

namespace {

CauseSpecificFit fit_from_baselines(StepFunction b1, StepFunction b2,
                                    Eigen::VectorXd beta1 = {},
                                    Eigen::VectorXd beta2 = {}) {
  CauseSpecificFit fit;
  fit.causes.resize(2);
  fit.causes[0].baseline = std::move(b1);
  fit.causes[1].baseline = std::move(b2);
  fit.causes[0].beta = std::move(beta1);
  fit.causes[1].beta = std::move(beta2);
  return fit;
}

}  // namespace

TEST_CASE("hand CIF with two half-unit hazard jumps") {
  // One cause jumping by 0.5 at t = 1 and 2:
  // F(1) = 0.5, F(2) = 0.5 + exp(-0.5) * 0.5.
  const auto fit = fit_from_baselines(StepFunction({1.0, 2.0}, {0.5, 1.0}),
                                      StepFunction({}, {}));
  const auto curves = predict_cif(fit, Eigen::VectorXd());
  REQUIRE(curves.size() == 2);
  REQUIRE(curves[0].grid == std::vector<double>{1.0, 2.0});
  CHECK(curves[0].values[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(curves[0].values[1] ==
        doctest::Approx(0.5 + std::exp(-0.5) * 0.5).epsilon(1e-15));
  CHECK(curves[1].values[0] == 0.0);
  CHECK(curves[1].values[1] == 0.0);
}

TEST_CASE("identical causes give identical CIFs") {
  const StepFunction b({0.5, 1.0, 1.7}, {0.2, 0.5, 0.9});
  const auto fit = fit_from_baselines(b, b);
  const auto curves = predict_cif(fit, Eigen::VectorXd());
  REQUIRE(curves[0].grid == curves[1].grid);
  for (std::size_t g = 0; g < curves[0].grid.size(); ++g)
    CHECK(curves[0].values[g] == doctest::Approx(curves[1].values[g])
                                     .epsilon(1e-15));
}

TEST_CASE("fitted CIFs match an independent recursion on the merged grid") {
  const Dataset ds = random_dataset(60, 2, 91);
  const auto g = TermGrammar::parse({"1", "z1", "z2"}, ds);
  const auto cfit = fit_mpple(ds, fit_cause_probability(ds, g));

  Eigen::VectorXd z0(2);
  z0 << 0.3, -0.5;
  const auto curves = predict_cif(cfit, z0);

  // Direct recursion from the covariate-scaled cumulative hazards.
  const StepFunction h1 = cumhaz_at_covariate(cfit, 1, z0);
  const StepFunction h2 = cumhaz_at_covariate(cfit, 2, z0);
  const std::vector<double> grid = merge_grids(h1.times(), h2.times());
  REQUIRE(curves[0].grid == grid);

  double f1 = 0.0, f2 = 0.0, prev = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double s = grid[m];
    const double surv = std::exp(-(h1.left_limit(s) + h2.left_limit(s)));
    f1 += surv * (h1(s) - h1.left_limit(s));
    f2 += surv * (h2(s) - h2.left_limit(s));
    CHECK(curves[0].values[m] == doctest::Approx(f1).epsilon(1e-12));
    CHECK(curves[1].values[m] == doctest::Approx(f2).epsilon(1e-12));
    // Monotone nondecreasing.
    CHECK(curves[0].values[m] >= prev);
    prev = curves[0].values[m];
  }
}

TEST_CASE("pre-scaling the baseline equals evaluating at z0") {
  const Dataset ds = random_dataset(40, 1, 97);
  const auto g = TermGrammar::parse({"1", "z1"}, ds);
  const auto cfit = fit_mpple(ds, fit_cause_probability(ds, g));

  Eigen::VectorXd z0(1);
  z0 << 0.8;
  const auto at_z0 = predict_cif(cfit, z0);

  // Absorb exp(beta' z0) into the baselines and evaluate at zero.
  CauseSpecificFit scaled = cfit;
  for (int j = 0; j < 2; ++j) {
    const double s = std::exp(scaled.causes[j].beta.dot(z0));
    std::vector<double> v = scaled.causes[j].baseline.values();
    for (double& x : v) x *= s;
    scaled.causes[j].baseline =
        StepFunction(scaled.causes[j].baseline.times(), v);
  }
  const auto at_zero = predict_cif(scaled, Eigen::VectorXd::Zero(1));
  for (std::size_t m = 0; m < at_z0[0].grid.size(); ++m)
    CHECK(at_z0[0].values[m] ==
          doctest::Approx(at_zero[0].values[m]).epsilon(1e-12));
}

TEST_CASE("cif_with_uncertainty brackets the estimate") {
  const Dataset ds = random_dataset(120, 2, 101);
  const auto g = TermGrammar::parse({"1", "t", "z1", "z2"}, ds);
  const auto mfit = fit_cause_probability(ds, g);
  const auto cfit = fit_mpple(ds, mfit);

  std::vector<BetaInfluence> bis;
  std::vector<CumhazInfluence> cis;
  for (int j = 1; j <= 2; ++j) {
    bis.push_back(compute_beta_influence(ds, mfit, cfit, j));
    cis.push_back(compute_cumhaz_influence(ds, mfit, cfit, j, bis.back()));
  }
  Eigen::VectorXd z0(2);
  z0 << 0.2, 0.0;
  const auto infl = cif_influence(cfit, z0, bis, cis);
  const auto curves = cif_with_uncertainty(cfit, infl, z0, 0.05);

  for (const auto& c : curves) {
    REQUIRE(c.se.size() == c.grid.size());
    for (std::size_t m = 0; m < c.grid.size(); ++m) {
      if (c.values[m] <= 0.0 || c.values[m] >= 1.0) {
        CHECK(std::isnan(c.lower_pt[m]));
        CHECK(std::isnan(c.upper_pt[m]));
        continue;
      }
      CHECK(c.se[m] >= 0.0);
      if (c.se[m] == 0.0) continue;
      CHECK(c.lower_pt[m] < c.values[m]);
      CHECK(c.upper_pt[m] > c.values[m]);
      CHECK(c.lower_pt[m] > 0.0);
      CHECK(c.upper_pt[m] < 1.0);
    }
  }

  // Influence rows sum to zero at every grid point for both causes.
  for (int j = 0; j < 2; ++j)
    CHECK(infl.per_cause[j].colwise().sum().lpNorm<Eigen::Infinity>() < 1e-6);
}
