#pragma once

#include <cstdint>
#include <vector>

#include "mpple/dataset.hpp"
#include "mpple/missingness.hpp"
#include "mpple/step_function.hpp"

namespace mpple {

/// Cumulative-residual check of the parametric cause-probability model.
struct GofResult {
  int cause = 1;
  StepFunction process;          // observed cumulative residual process
  double sup_observed = 0.0;     // sqrt(n) * sup_t |process(t)|
  double p_value = 1.0;
  double c_alpha = 0.0;          // critical value for the null envelope
  StepFunction band_upper;       // +c_alpha / sqrt(n) on the grid
  StepFunction band_lower;       // -c_alpha / sqrt(n)
  int replications = 0;
  std::uint64_t seed = 0;
};

/// Observed process n^-1 sum_i R_i [N_ij(t) - pi_j(W_i) N_i(t)], a step
/// function over the complete-case failure times.
StepFunction residual_process(const Dataset& ds, const MissingnessFit& mfit,
                              int cause);

/// Simulation-based supremum test: the null distribution of
/// sqrt(n) sup|process| is approximated by multiplier realizations of the
/// process's influence representation, including the correction for the
/// estimated coefficients. p-value uses the add-one convention.
GofResult gof_test(const Dataset& ds, const MissingnessFit& mfit, int cause,
                   int replications, double alpha, std::uint64_t seed);

}  // namespace mpple
