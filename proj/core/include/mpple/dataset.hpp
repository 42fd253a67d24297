#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mpple/errors.hpp"

namespace mpple {

/// One subject's observed tuple: follow-up time X = T ^ U, event indicator,
/// cause-observed indicator, cause (1..k, present only for complete-case
/// failures), model covariates Z, and auxiliary covariates A.
struct SubjectRecord {
  double time = 0.0;
  bool event = false;
  bool cause_observed = true;
  std::optional<int> cause;
  Eigen::VectorXd covariates;
  Eigen::VectorXd auxiliaries;
};

/// Immutable after load; safe for concurrent reads.
struct Dataset {
  std::vector<SubjectRecord> records;
  int k = 2;
  std::vector<std::string> covariate_names;
  std::vector<std::string> auxiliary_names;
  double tau = 0.0;

  std::size_t size() const { return records.size(); }
  int n_covariates() const {
    return static_cast<int>(covariate_names.size());
  }

  /// Checks every SubjectRecord invariant; throws DataError naming the
  /// first offending record (0-based index).
  void validate() const;
};

/// Column mapping for CSV ingestion. Column names must exist in the header.
struct CsvSchema {
  std::string time;
  std::string event;
  std::string cause;
  std::vector<std::string> covariates;
  std::vector<std::string> auxiliaries;
};

/// Loads a comma-separated file with a header row. The missing-cause token is
/// a literal "NA" or an empty field; censored rows must carry the missing
/// token. Rows with time > tau (when given) are rejected.
Dataset load_dataset(const std::string& path, const CsvSchema& schema,
                     int k = 2, std::optional<double> tau = std::nullopt);

/// Writes the dataset back out in the same column layout (full precision).
void save_dataset(const Dataset& ds, const CsvSchema& schema,
                  const std::string& path);

}  // namespace mpple
