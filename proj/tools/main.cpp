#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mpple/bands.hpp"
#include "mpple/cif.hpp"
#include "mpple/dataset.hpp"
#include "mpple/gof.hpp"
#include "mpple/influence.hpp"
#include "mpple/missingness.hpp"
#include "mpple/mpple_fit.hpp"
#include "mpple/simulation.hpp"
#include "mpple/stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mpple;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

std::vector<double> parse_csv_doubles(const std::string& s,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse number '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

/// Flags collected as optionals so they can override the JSON config.
struct Flags {
  std::string config_path;
  std::string data;
  std::string out = ".";
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> alpha;
  std::optional<int> replications;
  std::optional<int> scenario;
  std::optional<int> n;
  std::optional<std::string> theta;
  std::optional<int> replicates;
  std::optional<std::string> weight;
  std::optional<std::string> clip;
  std::optional<std::string> z0;
  std::optional<std::string> grammar;
  std::optional<double> eval_time;
  bool band = false;
};

json merge_config(const Flags& f) {
  json cfg = json::object();
  if (!f.config_path.empty()) cfg = load_config_file(f.config_path);
  if (!cfg.is_object()) throw ConfigError("config root must be an object");
  if (!f.data.empty()) cfg["data"] = f.data;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.threads) cfg["threads"] = *f.threads;
  if (f.alpha) cfg["alpha"] = *f.alpha;
  if (f.replications) cfg["replications"] = *f.replications;
  if (f.scenario) cfg["scenario"] = *f.scenario;
  if (f.n) cfg["n"] = *f.n;
  if (f.theta) cfg["theta"] = parse_csv_doubles(*f.theta, "--theta");
  if (f.replicates) cfg["replicates"] = *f.replicates;
  if (f.weight) cfg["weight"] = *f.weight;
  if (f.clip) cfg["clip"] = parse_csv_doubles(*f.clip, "--clip");
  if (f.z0) cfg["z0"] = parse_csv_doubles(*f.z0, "--z0");
  if (f.eval_time) cfg["eval_time"] = *f.eval_time;
  if (f.band) cfg["band"] = true;
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  if (f.grammar) {
    std::vector<std::string> terms;
    std::stringstream ss(*f.grammar);
    std::string tok;
    while (std::getline(ss, tok, ',')) terms.push_back(tok);
    cfg["grammar"] = terms;
  }
  return cfg;
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::vector<std::string> split_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) cols.push_back(tok);
  return cols;
}

CsvSchema schema_from_config(const json& cfg, const std::string& data_path) {
  CsvSchema s;
  if (cfg.contains("schema")) {
    const json& j = cfg.at("schema");
    s.time = get_or<std::string>(j, "time", "time");
    s.event = get_or<std::string>(j, "event", "event");
    s.cause = get_or<std::string>(j, "cause", "cause");
    s.covariates = get_or<std::vector<std::string>>(j, "covariates", {});
    s.auxiliaries = get_or<std::vector<std::string>>(j, "auxiliaries", {});
    if (s.covariates.empty()) {
      throw ConfigError("schema: covariates list must not be empty");
    }
    return s;
  }
  // Default mapping: time/event/cause columns, everything else a covariate.
  s.time = "time";
  s.event = "event";
  s.cause = "cause";
  for (const auto& col : split_header(data_path)) {
    if (col != s.time && col != s.event && col != s.cause) {
      s.covariates.push_back(col);
    }
  }
  if (s.covariates.empty()) {
    throw ConfigError("data has no covariate columns");
  }
  return s;
}

Dataset load_data(const json& cfg) {
  const std::string path = get_or<std::string>(cfg, "data", "");
  if (path.empty()) throw ConfigError("no data file given (--data)");
  const CsvSchema schema = schema_from_config(cfg, path);
  const int k = get_or<int>(cfg, "k", 2);
  std::optional<double> tau;
  if (cfg.contains("tau")) tau = cfg.at("tau").get<double>();
  return load_dataset(path, schema, k, tau);
}

TermGrammar grammar_from_config(const json& cfg, const Dataset& ds) {
  std::vector<std::string> terms =
      get_or<std::vector<std::string>>(cfg, "grammar", {});
  if (terms.empty()) {
    terms = {"1", "t"};
    for (const auto& name : ds.covariate_names) terms.push_back(name);
    for (const auto& name : ds.auxiliary_names) terms.push_back(name);
  }
  return TermGrammar::parse(terms, ds);
}

std::vector<Eigen::VectorXd> z0_from_config(const json& cfg,
                                            const Dataset& ds) {
  std::vector<std::vector<double>> raw;
  if (cfg.contains("z0")) {
    const json& j = cfg.at("z0");
    if (j.is_array() && !j.empty() && j.front().is_array()) {
      raw = j.get<std::vector<std::vector<double>>>();
    } else {
      raw.push_back(j.get<std::vector<double>>());
    }
  } else {
    // Default: the mean covariate vector.
    std::vector<double> mean(static_cast<std::size_t>(ds.n_covariates()), 0.0);
    for (const auto& r : ds.records) {
      for (int m = 0; m < ds.n_covariates(); ++m) {
        mean[static_cast<std::size_t>(m)] += r.covariates[m] / ds.size();
      }
    }
    raw.push_back(mean);
  }
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : raw) {
    if (static_cast<int>(v.size()) != ds.n_covariates()) {
      throw DataError("z0 has " + std::to_string(v.size()) +
                      " entries but the model has " +
                      std::to_string(ds.n_covariates()) + " covariates");
    }
    out.push_back(Eigen::Map<const Eigen::VectorXd>(
        v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

BandRequest band_request(const json& cfg, BandWeight weight) {
  BandRequest req;
  req.alpha = get_or<double>(cfg, "alpha", 0.05);
  req.replications = get_or<int>(cfg, "replications", 1000);
  req.weight = weight;
  req.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const auto clip = get_or<std::vector<double>>(cfg, "clip", {0.1, 0.9});
  if (clip.size() != 2) throw ConfigError("clip needs exactly two values");
  req.clip_lower = clip[0];
  req.clip_upper = clip[1];
  if (get_or<std::string>(cfg, "domain", "clip") == "events") {
    req.domain_rule = DomainRule::EventRange;
  }
  req.validate();
  return req;
}

std::vector<BandWeight> weights_from_config(const json& cfg) {
  const std::string w = get_or<std::string>(cfg, "weight", "both");
  if (w == "ep") return {BandWeight::EqualPrecision};
  if (w == "hw") return {BandWeight::HallWellner};
  if (w == "both") return {BandWeight::EqualPrecision, BandWeight::HallWellner};
  throw ConfigError("weight must be one of: ep, hw, both");
}

/// Refuses to clobber existing artifacts unless --force was given.
void prepare_out(const std::string& out, const std::vector<std::string>& files,
                 bool force) {
  fs::create_directories(out);
  if (force) return;
  for (const auto& f : files) {
    const fs::path p = fs::path(out) / f;
    if (fs::exists(p)) {
      throw ConfigError("output file exists (use --force): " + p.string());
    }
  }
}

void write_text(const std::string& out, const std::string& name,
                const std::string& content) {
  const fs::path p = fs::path(out) / name;
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << content;
}

void write_sidecar(const std::string& out, const std::string& command,
                   const json& cfg, const std::vector<std::string>& files) {
  json meta;
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["seed"] = get_or<std::uint64_t>(cfg, "seed", 0);
  meta["config_hash"] = fnv1a(cfg.dump());
  meta["artifacts"] = files;
  write_text(out, "run.json", meta.dump(2) + "\n");
}

struct FittedModel {
  Dataset ds;
  MissingnessFit mfit;
  CauseSpecificFit cfit;
  std::vector<BetaInfluence> beta_infl;
  std::vector<CumhazInfluence> cumhaz_infl;
};

FittedModel fit_all(const json& cfg, bool with_influence) {
  FittedModel m{load_data(cfg), {}, {}, {}, {}};
  const TermGrammar grammar = grammar_from_config(cfg, m.ds);
  m.mfit = fit_cause_probability(m.ds, grammar);
  m.cfit = fit_mpple(m.ds, m.mfit);
  if (with_influence) {
    for (int j = 1; j <= m.ds.k; ++j) {
      m.beta_infl.push_back(compute_beta_influence(m.ds, m.mfit, m.cfit, j));
      m.cumhaz_infl.push_back(
          compute_cumhaz_influence(m.ds, m.mfit, m.cfit, j, m.beta_infl.back()));
    }
  }
  return m;
}

json missingness_json(const FittedModel& m) {
  json out;
  out["terms"] = m.mfit.grammar.to_strings();
  out["k"] = m.mfit.k;
  out["gamma"] = std::vector<double>(m.mfit.gamma.data(),
                                     m.mfit.gamma.data() + m.mfit.dim());
  const Eigen::MatrixXd cov = m.mfit.fisher_info.ldlt().solve(
      Eigen::MatrixXd::Identity(m.mfit.dim(), m.mfit.dim()));
  std::vector<double> se;
  for (int i = 0; i < m.mfit.dim(); ++i) se.push_back(std::sqrt(cov(i, i)));
  out["se"] = se;
  out["loglik"] = m.mfit.loglik;
  out["iterations"] = m.mfit.iterations;
  out["converged"] = m.mfit.converged;
  return out;
}

json fit_json(const FittedModel& m) {
  const double zq = normal_quantile(0.975);
  json causes = json::array();
  for (int j = 1; j <= m.ds.k; ++j) {
    const CauseFit& cf = m.cfit.cause(j);
    const Eigen::VectorXd& se = m.beta_infl[static_cast<std::size_t>(j - 1)].se;
    json c;
    c["cause"] = j;
    c["covariates"] = m.ds.covariate_names;
    std::vector<double> beta, ses, hr, hr_lo, hr_hi;
    for (int p = 0; p < cf.beta.size(); ++p) {
      beta.push_back(cf.beta[p]);
      ses.push_back(se[p]);
      hr.push_back(std::exp(cf.beta[p]));
      hr_lo.push_back(std::exp(cf.beta[p] - zq * se[p]));
      hr_hi.push_back(std::exp(cf.beta[p] + zq * se[p]));
    }
    c["beta"] = beta;
    c["se"] = ses;
    c["hazard_ratio"] = hr;
    c["hr_lower_95"] = hr_lo;
    c["hr_upper_95"] = hr_hi;
    c["iterations"] = cf.iterations;
    c["converged"] = cf.converged;
    causes.push_back(c);
  }
  json out;
  out["causes"] = causes;
  out["n"] = m.ds.size();
  return out;
}

std::string baseline_csv(const FittedModel& m) {
  std::ostringstream os;
  os << "cause,time,dLambda,Lambda\n";
  for (int j = 1; j <= m.ds.k; ++j) {
    const auto& bl = m.cfit.cause(j).baseline;
    double prev = 0.0;
    for (std::size_t g = 0; g < bl.size(); ++g) {
      os << j << ',' << fmt(bl.times()[g]) << ',' << fmt(bl.values()[g] - prev)
         << ',' << fmt(bl.values()[g]) << '\n';
      prev = bl.values()[g];
    }
  }
  return os.str();
}

int cmd_fit(const Flags& flags) {
  const json cfg = merge_config(flags);
  const std::vector<std::string> files = {"missingness.json", "fit.json",
                                          "baseline.csv", "run.json"};
  prepare_out(flags.out, files, flags.force);

  const FittedModel m = fit_all(cfg, true);
  write_text(flags.out, "missingness.json", missingness_json(m).dump(2) + "\n");
  write_text(flags.out, "fit.json", fit_json(m).dump(2) + "\n");
  write_text(flags.out, "baseline.csv", baseline_csv(m));
  write_sidecar(flags.out, "fit", cfg, files);
  return 0;
}

int cmd_predict(const Flags& flags) {
  const json cfg = merge_config(flags);
  const bool with_bands = get_or<bool>(cfg, "band", false);
  const double alpha = get_or<double>(cfg, "alpha", 0.05);

  const FittedModel m = fit_all(cfg, true);
  const auto z0s = z0_from_config(cfg, m.ds);

  std::vector<std::string> files = {"run.json"};
  for (std::size_t i = 0; i < z0s.size(); ++i) {
    files.push_back("cif_" + std::to_string(i) + ".csv");
  }
  prepare_out(flags.out, files, flags.force);

  const auto weights =
      with_bands ? weights_from_config(cfg) : std::vector<BandWeight>{};

  for (std::size_t zi = 0; zi < z0s.size(); ++zi) {
    const Eigen::VectorXd& z0 = z0s[zi];
    const CifInfluence infl =
        cif_influence(m.cfit, z0, m.beta_infl, m.cumhaz_infl);
    const auto curves = cif_with_uncertainty(m.cfit, infl, z0, alpha);

    // Per cause and weight: simultaneous band values mapped by grid time.
    // Empty cells outside the band domain.
    const std::size_t M = curves.front().grid.size();
    std::vector<std::vector<std::string>> band_lo, band_hi;
    int pointwise_violations = 0;
    for (const BandWeight w : weights) {
      for (const auto& curve : curves) {
        BandRequest req = band_request(cfg, w);
        const Band band = band_cif(curve, infl, req);
        std::vector<std::string> lo(M), hi(M);
        for (std::size_t d = 0; d < band.grid.size(); ++d) {
          std::size_t g = 0;
          while (curve.grid[g] != band.grid[d]) ++g;
          lo[g] = fmt(band.lower[d]);
          hi[g] = fmt(band.upper[d]);
          if (!std::isnan(curve.upper_pt[g]) &&
              (band.upper[d] < curve.upper_pt[g] ||
               band.lower[d] > curve.lower_pt[g])) {
            ++pointwise_violations;
          }
        }
        band_lo.push_back(std::move(lo));
        band_hi.push_back(std::move(hi));
      }
    }
    if (pointwise_violations > 0) {
      std::cerr << "warning: simultaneous band narrower than the pointwise "
                   "interval at "
                << pointwise_violations << " grid points (z0 index " << zi
                << ")\n";
    }

    std::ostringstream os;
    os << "cause,time,cif,se,lower_pt,upper_pt";
    for (const BandWeight w : weights) {
      const char* tag = w == BandWeight::EqualPrecision ? "ep" : "hw";
      os << ",band_lower_" << tag << ",band_upper_" << tag;
    }
    os << '\n';
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const auto& curve = curves[c];
      for (std::size_t g = 0; g < M; ++g) {
        os << curve.cause << ',' << fmt(curve.grid[g]) << ','
           << fmt(curve.values[g]) << ',' << fmt(curve.se[g]) << ','
           << (std::isnan(curve.lower_pt[g]) ? "" : fmt(curve.lower_pt[g]))
           << ','
           << (std::isnan(curve.upper_pt[g]) ? "" : fmt(curve.upper_pt[g]));
        for (std::size_t w = 0; w < weights.size(); ++w) {
          const auto& lo = band_lo[w * curves.size() + c];
          const auto& hi = band_hi[w * curves.size() + c];
          os << ',' << lo[g] << ',' << hi[g];
        }
        os << '\n';
      }
    }
    write_text(flags.out, "cif_" + std::to_string(zi) + ".csv", os.str());
  }
  write_sidecar(flags.out, "predict", cfg, files);
  return 0;
}

int cmd_band(const Flags& flags) {
  const json cfg = merge_config(flags);
  const FittedModel m = fit_all(cfg, true);

  // z0 defaults to the baseline (all-zero covariates) for hazard bands.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(m.ds.n_covariates());
  if (cfg.contains("z0")) z0 = z0_from_config(cfg, m.ds).front();

  const std::vector<std::string> files = {"band_cumhaz.csv", "band.json",
                                          "run.json"};
  prepare_out(flags.out, files, flags.force);

  const auto weights = weights_from_config(cfg);
  json meta = json::array();
  std::ostringstream os;
  os << "cause,weight,time,estimate,lower,upper\n";
  for (int j = 1; j <= m.ds.k; ++j) {
    const StepFunction curve = cumhaz_at_covariate(m.cfit, j, z0);
    const Eigen::MatrixXd infl = covariate_cumhaz_influence(
        m.cfit, j, z0, m.beta_infl[static_cast<std::size_t>(j - 1)],
        m.cumhaz_infl[static_cast<std::size_t>(j - 1)]);
    for (const BandWeight w : weights) {
      const char* tag = w == BandWeight::EqualPrecision ? "ep" : "hw";
      const Band band = band_cumhaz_at(curve, infl, band_request(cfg, w));
      for (std::size_t d = 0; d < band.grid.size(); ++d) {
        os << j << ',' << tag << ',' << fmt(band.grid[d]) << ','
           << fmt(curve(band.grid[d])) << ',' << fmt(band.lower[d]) << ','
           << fmt(band.upper[d]) << '\n';
      }
      json b;
      b["cause"] = j;
      b["weight"] = tag;
      b["c_alpha"] = band.c_alpha;
      b["replications"] = band.replications_used;
      b["degenerate"] = band.degenerate;
      meta.push_back(b);
    }
  }
  write_text(flags.out, "band_cumhaz.csv", os.str());
  write_text(flags.out, "band.json", meta.dump(2) + "\n");
  write_sidecar(flags.out, "band", cfg, files);
  return 0;
}

int cmd_gof(const Flags& flags) {
  const json cfg = merge_config(flags);
  const Dataset ds = load_data(cfg);
  const TermGrammar grammar = grammar_from_config(cfg, ds);
  const MissingnessFit mfit = fit_cause_probability(ds, grammar);

  const int B = get_or<int>(cfg, "replications", 1000);
  const double alpha = get_or<double>(cfg, "alpha", 0.05);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);

  const std::vector<std::string> files = {"gof.json", "gof.csv", "run.json"};
  prepare_out(flags.out, files, flags.force);

  json meta = json::array();
  std::ostringstream os;
  os << "cause,time,process,lower,upper\n";
  for (int j = 1; j <= ds.k; ++j) {
    const GofResult res = gof_test(ds, mfit, j, B, alpha, seed);
    for (std::size_t g = 0; g < res.process.size(); ++g) {
      os << j << ',' << fmt(res.process.times()[g]) << ','
         << fmt(res.process.values()[g]) << ','
         << fmt(res.band_lower.values()[g]) << ','
         << fmt(res.band_upper.values()[g]) << '\n';
    }
    json r;
    r["cause"] = j;
    r["sup"] = res.sup_observed;
    r["p_value"] = res.p_value;
    r["c_alpha"] = res.c_alpha;
    r["replications"] = res.replications;
    r["seed"] = res.seed;
    meta.push_back(r);
  }
  write_text(flags.out, "gof.csv", os.str());
  write_text(flags.out, "gof.json", meta.dump(2) + "\n");
  write_sidecar(flags.out, "gof", cfg, files);
  return 0;
}

int cmd_simulate(const Flags& flags) {
  const json cfg = merge_config(flags);
  ScenarioConfig sc;
  sc.scenario = get_or<int>(cfg, "scenario", 1);
  sc.n = get_or<int>(cfg, "n", 400);
  sc.replicates = get_or<int>(cfg, "replicates", 1000);
  sc.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const auto theta =
      get_or<std::vector<double>>(cfg, "theta", {0.7, 1.0, -1.0, 1.0});
  if (theta.size() != 4) throw ConfigError("theta needs exactly four values");
  for (int m = 0; m < 4; ++m) sc.theta[m] = theta[static_cast<std::size_t>(m)];
  sc.validate();

  StudyOptions opt;
  opt.threads = get_or<int>(
      cfg, "threads",
      std::max(1u, std::thread::hardware_concurrency()));
  if (cfg.contains("grammar")) {
    opt.working_grammar = cfg.at("grammar").get<std::vector<std::string>>();
  }
  if (cfg.contains("eval_time")) {
    opt.eval_time = cfg.at("eval_time").get<double>();
    const auto z0 = get_or<std::vector<double>>(cfg, "z0", {0.5, 1.0});
    opt.z0 = Eigen::Map<const Eigen::VectorXd>(
        z0.data(), static_cast<Eigen::Index>(z0.size()));
  }

  const std::vector<std::string> files = {"study.csv", "run.json"};
  prepare_out(flags.out, files, flags.force);

  const StudySummary summary = run_study(sc, opt);
  std::ostringstream os;
  os << "scenario,n,replicates,estimand,truth,bias,mcsd,ase,cp,mse,"
        "missing_pct,censor_pct,cause1_pct\n";
  for (const auto& row : summary.rows) {
    os << sc.scenario << ',' << sc.n << ',' << summary.replicates_used << ','
       << row.estimand << ',' << fmt(row.truth) << ',' << fmt(row.bias) << ','
       << (row.mcsd_defined ? fmt(row.mcsd) : "") << ',' << fmt(row.ase) << ','
       << fmt(row.cp) << ',' << fmt(row.mse) << ','
       << fmt(summary.missing_pct) << ',' << fmt(summary.censor_pct) << ','
       << fmt(summary.cause1_pct) << '\n';
  }
  write_text(flags.out, "study.csv", os.str());
  write_sidecar(flags.out, "simulate", cfg, files);
  return 0;
}

void add_common(CLI::App* cmd, Flags& f, bool with_data) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--force", f.force, "overwrite existing outputs");
  cmd->add_option("--seed", f.seed, "RNG seed (default 0)");
  if (with_data) cmd->add_option("--data", f.data, "input CSV");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competing-risks regression with missing cause of failure"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Flags f;
  auto* fit = app.add_subcommand("fit", "fit the hazard model");
  add_common(fit, f, true);
  fit->add_option("--grammar", f.grammar,
                  "cause-probability terms, comma separated");

  auto* predict = app.add_subcommand("predict", "cumulative incidence curves");
  add_common(predict, f, true);
  predict->add_option("--grammar", f.grammar, "cause-probability terms");
  predict->add_option("--z0", f.z0, "covariate vector, comma separated");
  predict->add_option("--alpha", f.alpha, "CI level (default 0.05)");
  predict->add_flag("--band", f.band, "add simultaneous bands");
  predict->add_option("--B", f.replications, "multiplier replications");
  predict->add_option("--weight", f.weight, "band weight: ep, hw, both");
  predict->add_option("--clip", f.clip, "band domain clip c1,c2");

  auto* band = app.add_subcommand("band", "cumulative hazard bands");
  add_common(band, f, true);
  band->add_option("--grammar", f.grammar, "cause-probability terms");
  band->add_option("--z0", f.z0, "covariate vector, comma separated");
  band->add_option("--alpha", f.alpha, "band level (default 0.05)");
  band->add_option("--B", f.replications, "multiplier replications");
  band->add_option("--weight", f.weight, "band weight: ep, hw, both");
  band->add_option("--clip", f.clip, "band domain clip c1,c2");

  auto* gof = app.add_subcommand("gof", "cause-probability model check");
  add_common(gof, f, true);
  gof->add_option("--grammar", f.grammar, "cause-probability terms");
  gof->add_option("--alpha", f.alpha, "test level (default 0.05)");
  gof->add_option("--B", f.replications, "multiplier replications");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study");
  add_common(simulate, f, false);
  simulate->add_option("--scenario", f.scenario, "generator scenario 1..4");
  simulate->add_option("--n", f.n, "sample size per replicate");
  simulate->add_option("--theta", f.theta, "missingness coefficients t0,..,t3");
  simulate->add_option("--replicates", f.replicates, "replicate count");
  simulate->add_option("--threads", f.threads, "worker threads");
  simulate->add_option("--grammar", f.grammar, "working model terms");
  simulate->add_option("--eval-time", f.eval_time,
                       "also track Lambda1 and the cause-1 CIF at this time");
  simulate->add_option("--z0", f.z0, "CIF covariates (default 0.5,1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(f);
    if (predict->parsed()) return cmd_predict(f);
    if (band->parsed()) return cmd_band(f);
    if (gof->parsed()) return cmd_gof(f);
    if (simulate->parsed()) return cmd_simulate(f);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
