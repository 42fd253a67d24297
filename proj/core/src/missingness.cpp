#include "mpple/missingness.hpp"

#include <cmath>
#include <vector>

namespace mpple {

namespace {

/// Cause probabilities for one design row under a stacked gamma.
/// eta_j = gamma_j^T w for j < k, cause k is the reference (eta_k = 0).
Eigen::VectorXd probabilities(const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& w, int k) {
  const int m = static_cast<int>(w.size());
  Eigen::VectorXd eta(k);
  for (int j = 0; j + 1 < k; ++j) {
    eta[j] = gamma.segment(j * m, m).dot(w);
  }
  eta[k - 1] = 0.0;
  // Softmax with max subtraction.
  const double emax = eta.maxCoeff();
  Eigen::VectorXd pi = (eta.array() - emax).exp();
  pi /= pi.sum();
  return pi;
}

struct CompleteCase {
  int record_index;
  int cause;  // 1..k
  Eigen::VectorXd w;
};

std::vector<CompleteCase> complete_cases(const Dataset& ds,
                                         const TermGrammar& grammar) {
  std::vector<CompleteCase> cc;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (r.event && r.cause_observed) {
      cc.push_back({static_cast<int>(i), *r.cause,
                    grammar.design_row(r, ds)});
    }
  }
  return cc;
}

}  // namespace

double cause_probability_loglik(const Dataset& ds, const TermGrammar& grammar,
                                const Eigen::VectorXd& gamma) {
  double ll = 0.0;
  for (const auto& c : complete_cases(ds, grammar)) {
    const Eigen::VectorXd pi = probabilities(gamma, c.w, ds.k);
    ll += std::log(pi[c.cause - 1]);
  }
  return ll;
}

MissingnessFit fit_cause_probability(const Dataset& ds,
                                     const TermGrammar& grammar) {
  const int k = ds.k;
  const int m = grammar.dim();
  const int dim = (k - 1) * m;
  const auto cc = complete_cases(ds, grammar);

  std::vector<int> cause_counts(static_cast<std::size_t>(k), 0);
  for (const auto& c : cc) ++cause_counts[static_cast<std::size_t>(c.cause - 1)];
  for (int j = 0; j < k; ++j) {
    if (cause_counts[static_cast<std::size_t>(j)] == 0) {
      throw FitError("cause-probability model: no complete cases for cause " +
                     std::to_string(j + 1));
    }
  }

  // Rank check on the complete-case design matrix.
  {
    Eigen::MatrixXd wtw = Eigen::MatrixXd::Zero(m, m);
    for (const auto& c : cc) wtw += c.w * c.w.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(wtw);
    if (lu.rank() < m) {
      throw FitError("cause-probability model: rank-deficient design");
    }
  }

  auto score_info = [&](const Eigen::VectorXd& gamma, Eigen::VectorXd& score,
                        Eigen::MatrixXd& info) {
    score.setZero(dim);
    info.setZero(dim, dim);
    for (const auto& c : cc) {
      const Eigen::VectorXd pi = probabilities(gamma, c.w, k);
      for (int j = 0; j + 1 < k; ++j) {
        const double yj = c.cause == j + 1 ? 1.0 : 0.0;
        score.segment(j * m, m) += (yj - pi[j]) * c.w;
        for (int l = 0; l + 1 < k; ++l) {
          const double v = pi[j] * ((j == l ? 1.0 : 0.0) - pi[l]);
          info.block(j * m, l * m, m, m) += v * c.w * c.w.transpose();
        }
      }
    }
  };

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(dim);
  double ll = cause_probability_loglik(ds, grammar, gamma);
  Eigen::VectorXd score(dim);
  Eigen::MatrixXd info(dim, dim);

  MissingnessFit fit;
  fit.grammar = grammar;
  fit.k = k;

  constexpr double kTol = 1e-8;
  constexpr int kMaxIter = 100;
  constexpr int kMaxHalvings = 20;
  constexpr double kSeparationBound = 50.0;

  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    score_info(gamma, score, info);
    if (score.lpNorm<Eigen::Infinity>() < kTol) {
      converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw FitError("cause-probability model: singular information matrix");
    }
    Eigen::VectorXd step = ldlt.solve(score);
    // Step-halving keeps the log-likelihood non-decreasing.
    double new_ll = 0.0;
    int halving = 0;
    for (; halving <= kMaxHalvings; ++halving) {
      new_ll = cause_probability_loglik(ds, grammar, gamma + step);
      if (new_ll >= ll - 1e-10 * (1.0 + std::abs(ll))) break;
      step *= 0.5;
    }
    if (halving > kMaxHalvings) {
      throw FitError("cause-probability model: step-halving failed");
    }
    gamma += step;
    ll = new_ll;
    if (gamma.lpNorm<Eigen::Infinity>() > kSeparationBound) {
      throw FitError(
          "cause-probability model: separation detected (coefficients "
          "diverging)");
    }
  }
  if (!converged) {
    throw FitError("cause-probability model: no convergence in " +
                   std::to_string(kMaxIter) + " iterations");
  }

  score_info(gamma, score, info);
  fit.gamma = gamma;
  fit.fisher_info = info;
  fit.loglik = ll;
  fit.converged = true;
  fit.iterations = iter;
  fit.omega = influence_omega(fit, ds);
  return fit;
}

Eigen::VectorXd predict_pi(const MissingnessFit& fit,
                           const SubjectRecord& record, const Dataset& ds) {
  return probabilities(fit.gamma, fit.grammar.design_row(record, ds), fit.k);
}

Eigen::VectorXd pi_gradient(const MissingnessFit& fit,
                            const SubjectRecord& record, const Dataset& ds,
                            int cause) {
  const int k = fit.k;
  const int m = fit.block_dim();
  const Eigen::VectorXd w = fit.grammar.design_row(record, ds);
  const Eigen::VectorXd pi = probabilities(fit.gamma, w, k);
  Eigen::VectorXd grad((k - 1) * m);
  // d pi_j / d gamma_l = pi_j (1{j=l} - pi_l) w, including j = k with
  // 1{k=l} = 0.
  for (int l = 0; l + 1 < k; ++l) {
    const double v = pi[cause - 1] * ((cause - 1 == l ? 1.0 : 0.0) - pi[l]);
    grad.segment(l * m, m) = v * w;
  }
  return grad;
}

Eigen::MatrixXd influence_omega(const MissingnessFit& fit, const Dataset& ds) {
  const int n = static_cast<int>(ds.size());
  const int k = fit.k;
  const int m = fit.block_dim();
  const int dim = (k - 1) * m;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.fisher_info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FitError("influence_omega: singular information matrix");
  }

  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, dim);
  for (int i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    if (!r.event || !r.cause_observed) continue;
    const Eigen::VectorXd w = fit.grammar.design_row(r, ds);
    const Eigen::VectorXd pi = probabilities(fit.gamma, w, k);
    Eigen::VectorXd u(dim);
    for (int j = 0; j + 1 < k; ++j) {
      const double yj = *r.cause == j + 1 ? 1.0 : 0.0;
      u.segment(j * m, m) = (yj - pi[j]) * w;
    }
    // omega_i = n * I_total^-1 U_i so that n^-1 sum omega omega^T estimates
    // n * Cov(gamma_hat); this matches the scaling of the beta influence
    // functions downstream.
    omega.row(i) = static_cast<double>(n) * ldlt.solve(u).transpose();
  }
  return omega;
}

}  // namespace mpple
