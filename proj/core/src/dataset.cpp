#include "mpple/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mpple {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

double parse_double(const std::string& s, std::size_t row,
                    const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(row) + ": non-numeric value '" +
                    s + "' in column " + col);
  }
}

}  // namespace

void Dataset::validate() const {
  if (k < 2) throw DataError("dataset: k must be >= 2");
  const auto p = covariate_names.size();
  const auto q = auxiliary_names.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i) + ": ";
    if (!(r.time >= 0.0) || !std::isfinite(r.time)) {
      throw DataError(where + "time must be finite and nonnegative");
    }
    if (r.event && r.time == 0.0) {
      throw DataError(where + "failure at time 0 is not supported");
    }
    if (r.time > tau) {
      throw DataError(where + "time exceeds tau");
    }
    if (!r.event) {
      if (!r.cause_observed || r.cause.has_value()) {
        throw DataError(where + "censored record must have no cause and R=1");
      }
    } else if (r.cause_observed) {
      if (!r.cause.has_value() || *r.cause < 1 || *r.cause > k) {
        throw DataError(where + "observed cause must be in 1.." +
                        std::to_string(k));
      }
    } else if (r.cause.has_value()) {
      throw DataError(where + "missing-cause failure must carry no cause");
    }
    if (static_cast<std::size_t>(r.covariates.size()) != p ||
        static_cast<std::size_t>(r.auxiliaries.size()) != q) {
      throw DataError(where + "covariate/auxiliary dimension mismatch");
    }
  }
}

Dataset load_dataset(const std::string& path, const CsvSchema& schema, int k,
                     std::optional<double> tau) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_csv_line(line);

  auto col_index = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) == name) return static_cast<int>(c);
    }
    throw DataError(path + ": column '" + name + "' not found in header");
  };

  const int time_c = col_index(schema.time);
  const int event_c = col_index(schema.event);
  const int cause_c = col_index(schema.cause);
  std::vector<int> cov_c, aux_c;
  for (const auto& c : schema.covariates) cov_c.push_back(col_index(c));
  for (const auto& c : schema.auxiliaries) aux_c.push_back(col_index(c));

  Dataset ds;
  ds.k = k;
  ds.covariate_names = schema.covariates;
  ds.auxiliary_names = schema.auxiliaries;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    SubjectRecord r;
    r.time = parse_double(trim(fields[time_c]), row, schema.time);
    if (r.time < 0.0) {
      throw DataError("row " + std::to_string(row) + ": negative time");
    }
    const double ev = parse_double(trim(fields[event_c]), row, schema.event);
    if (ev != 0.0 && ev != 1.0) {
      throw DataError("row " + std::to_string(row) +
                      ": event indicator must be 0 or 1");
    }
    r.event = ev == 1.0;

    const std::string cause_s = trim(fields[cause_c]);
    if (!r.event) {
      if (!is_missing_token(cause_s)) {
        throw DataError("row " + std::to_string(row) +
                        ": censored row carries a cause value");
      }
      r.cause_observed = true;
    } else if (is_missing_token(cause_s)) {
      r.cause_observed = false;
    } else {
      const double cv = parse_double(cause_s, row, schema.cause);
      const int cause = static_cast<int>(cv);
      if (cv != cause || cause < 1 || cause > k) {
        throw DataError("row " + std::to_string(row) + ": cause '" + cause_s +
                        "' outside 1.." + std::to_string(k));
      }
      r.cause_observed = true;
      r.cause = cause;
    }

    r.covariates.resize(static_cast<Eigen::Index>(cov_c.size()));
    for (std::size_t m = 0; m < cov_c.size(); ++m) {
      r.covariates[static_cast<Eigen::Index>(m)] =
          parse_double(trim(fields[cov_c[m]]), row, schema.covariates[m]);
    }
    r.auxiliaries.resize(static_cast<Eigen::Index>(aux_c.size()));
    for (std::size_t m = 0; m < aux_c.size(); ++m) {
      r.auxiliaries[static_cast<Eigen::Index>(m)] =
          parse_double(trim(fields[aux_c[m]]), row, schema.auxiliaries[m]);
    }
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw DataError(path + ": no data rows");

  double max_time = 0.0;
  for (const auto& r : ds.records) max_time = std::max(max_time, r.time);
  ds.tau = tau.value_or(max_time);

  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const CsvSchema& schema,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << std::setprecision(17);
  out << schema.time << ',' << schema.event << ',' << schema.cause;
  for (const auto& c : schema.covariates) out << ',' << c;
  for (const auto& c : schema.auxiliaries) out << ',' << c;
  out << '\n';
  for (const auto& r : ds.records) {
    out << r.time << ',' << (r.event ? 1 : 0) << ',';
    if (r.cause.has_value()) out << *r.cause;
    else out << "NA";
    for (Eigen::Index m = 0; m < r.covariates.size(); ++m) {
      out << ',' << r.covariates[m];
    }
    for (Eigen::Index m = 0; m < r.auxiliaries.size(); ++m) {
      out << ',' << r.auxiliaries[m];
    }
    out << '\n';
  }
}

}  // namespace mpple
