#include "mpple/grammar.hpp"

#include <algorithm>
#include <cmath>

#include "mpple/errors.hpp"

namespace mpple {

std::string Term::to_string() const {
  switch (kind) {
    case Kind::Intercept:
      return "1";
    case Kind::Time:
      return "t";
    case Kind::LogTime:
      return "log(t)";
    case Kind::Hinge:
      return "pw(t," + std::to_string(knot) + ")";
    case Kind::Covariate:
    case Kind::Auxiliary:
      return name;
  }
  return "?";
}

TermGrammar::TermGrammar(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty() || terms_.front().kind != Term::Kind::Intercept) {
    throw ConfigError("grammar: first term must be the intercept");
  }
  const auto n_intercepts =
      std::count_if(terms_.begin(), terms_.end(), [](const Term& t) {
        return t.kind == Term::Kind::Intercept;
      });
  if (n_intercepts != 1) {
    throw ConfigError("grammar: exactly one intercept term required");
  }
}

namespace {

int find_name(const std::vector<std::string>& names, const std::string& s) {
  const auto it = std::find(names.begin(), names.end(), s);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}  // namespace

TermGrammar TermGrammar::parse(const std::vector<std::string>& specs,
                               const Dataset& ds) {
  std::vector<Term> terms;
  for (const auto& s : specs) {
    Term t;
    if (s == "1") {
      t.kind = Term::Kind::Intercept;
    } else if (s == "t") {
      t.kind = Term::Kind::Time;
    } else if (s == "log(t)") {
      t.kind = Term::Kind::LogTime;
    } else if (s.rfind("pw(t,", 0) == 0 && s.back() == ')') {
      t.kind = Term::Kind::Hinge;
      try {
        t.knot = std::stod(s.substr(5, s.size() - 6));
      } catch (const std::exception&) {
        throw ConfigError("grammar: bad hinge term '" + s + "'");
      }
      if (t.knot <= 0.0) {
        throw ConfigError("grammar: hinge knot must be positive in '" + s +
                          "'");
      }
    } else if (find_name(ds.covariate_names, s) >= 0) {
      t.kind = Term::Kind::Covariate;
      t.name = s;
    } else if (find_name(ds.auxiliary_names, s) >= 0) {
      t.kind = Term::Kind::Auxiliary;
      t.name = s;
    } else {
      throw ConfigError("grammar: unknown term or column '" + s + "'");
    }
    terms.push_back(std::move(t));
  }
  return TermGrammar(std::move(terms));
}

Eigen::VectorXd TermGrammar::design_row(const SubjectRecord& record,
                                        const Dataset& ds) const {
  Eigen::VectorXd row(dim());
  for (int m = 0; m < dim(); ++m) {
    const Term& t = terms_[static_cast<std::size_t>(m)];
    switch (t.kind) {
      case Term::Kind::Intercept:
        row[m] = 1.0;
        break;
      case Term::Kind::Time:
        row[m] = record.time;
        break;
      case Term::Kind::LogTime:
        if (record.time <= 0.0) {
          throw DataError("grammar: log(t) undefined at time 0");
        }
        row[m] = std::log(record.time);
        break;
      case Term::Kind::Hinge:
        row[m] = std::max(record.time - t.knot, 0.0);
        break;
      case Term::Kind::Covariate: {
        const int idx = find_name(ds.covariate_names, t.name);
        if (idx < 0) throw DataError("grammar: unknown covariate " + t.name);
        row[m] = record.covariates[idx];
        break;
      }
      case Term::Kind::Auxiliary: {
        const int idx = find_name(ds.auxiliary_names, t.name);
        if (idx < 0) throw DataError("grammar: unknown auxiliary " + t.name);
        row[m] = record.auxiliaries[idx];
        break;
      }
    }
  }
  return row;
}

bool TermGrammar::has_time_term() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) {
    return t.kind == Term::Kind::Time || t.kind == Term::Kind::LogTime ||
           t.kind == Term::Kind::Hinge;
  });
}

std::vector<std::string> TermGrammar::to_strings() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.to_string());
  return out;
}

}  // namespace mpple
