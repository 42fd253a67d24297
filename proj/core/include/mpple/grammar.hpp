#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mpple/dataset.hpp"

namespace mpple {

/// Regressor terms for the cause-probability model. Serialized forms:
/// "1", "t", "log(t)", "pw(t,12)" (hinge max(t-12, 0)), or a covariate /
/// auxiliary column name.
struct Term {
  enum class Kind { Intercept, Covariate, Auxiliary, Time, LogTime, Hinge };
  Kind kind = Kind::Intercept;
  std::string name;   // covariate / auxiliary column
  double knot = 0.0;  // hinge knot

  std::string to_string() const;
};

/// Ordered term list; exactly one intercept, always first.
class TermGrammar {
 public:
  TermGrammar() = default;
  explicit TermGrammar(std::vector<Term> terms);

  /// Parses serialized term strings, resolving names against the dataset's
  /// covariate and auxiliary columns.
  static TermGrammar parse(const std::vector<std::string>& specs,
                           const Dataset& ds);

  /// Evaluates the terms at a failure record, intercept first.
  /// The time-dependent terms use the record's observed time (which equals
  /// the failure time T when event = 1).
  Eigen::VectorXd design_row(const SubjectRecord& record,
                             const Dataset& ds) const;

  const std::vector<Term>& terms() const { return terms_; }
  int dim() const { return static_cast<int>(terms_.size()); }
  bool has_time_term() const;
  std::vector<std::string> to_strings() const;

 private:
  std::vector<Term> terms_;
};

}  // namespace mpple
