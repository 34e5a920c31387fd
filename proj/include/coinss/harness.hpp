#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coinss/estimate.hpp"
#include "coinss/levy.hpp"
#include "coinss/model.hpp"
#include "coinss/simulate.hpp"

namespace coinss {

/// Key-value config text: one "key = value" per line, '#' comments.
/// Parsing and canonical re-rendering round-trip exactly.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);
std::string canonical_config_text(const std::map<std::string, std::string>& kv);

struct ExperimentConfig {
  std::string model = "canonical2d";
  std::optional<std::string> model_file;  // user-defined spec
  std::string driver = "brownian";        // brownian | nig
  // NIG parameters (driver = nig)
  double nig_alpha = 3.0;
  double nig_delta = 1.0;
  Vector nig_beta;
  Matrix nig_Delta;
  bool nig_center = true;
  Vector nig_mu;  // used only when nig_center = false

  int replicates = 100;
  int n = 2000;
  double h = 1.0;
  double euler_dt = 0.01;
  double burn_in = 0.0;
  std::string scheme = "euler";  // euler | exact-gaussian
  std::uint64_t seed = 1;
  std::string out = "out";
  int workers = 1;

  int starts = 5;
  double start_spread = 0.1;
  int max_evals = 20000;
  double tol_x = 1e-8;
  double tol_f = 1e-10;
  int restarts = 1;
  int bandwidth = -1;

  std::vector<int> sizes = {500, 2000, 8000};  // rate study

  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_kv() const;

  ModelSpec resolve_model() const;
  LevyConfig resolve_driver(const ModelSpec& spec, const Vector& theta) const;
  /// True parameter of the study; for NIG drivers the Sigma_L coordinates
  /// are replaced by the exact NIG covariance entries.
  Vector resolve_truth(const ModelSpec& spec) const;
  EstimateOptions estimate_options() const;
};

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string status;  // converged | max-iter | failed:<reason>
  int iterations = 0;
  double loglik = 0.0;
  Vector theta;        // empty on failure
  bool ok() const { return theta.size() > 0; }
};

struct MonteCarloSummary {
  Vector truth;        // per-coordinate true value
  Vector mean, bias, std_dev;  // bias = truth - mean
  int replicates = 0;
  int failures = 0;
};

MonteCarloSummary summarize(const std::vector<ReplicateRecord>& records,
                            const Vector& truth);

void write_replicates_csv(const std::vector<ReplicateRecord>& records,
                          const std::string& path);
std::vector<ReplicateRecord> read_replicates_csv(const std::string& path);
void write_summary_csv(const MonteCarloSummary& s, const std::string& path);
MonteCarloSummary read_summary_csv(const std::string& path);

struct MonteCarloRun {
  MonteCarloSummary summary;
  std::vector<ReplicateRecord> records;
};

/// Simulate + estimate over cfg.replicates independent replicates with
/// replicate-indexed child seeds; failures are isolated and counted. When
/// out_dir is nonempty the per-replicate and summary CSVs are written there.
MonteCarloRun run_replicates(const ExperimentConfig& cfg,
                             const std::string& out_dir = "");

struct MisspecificationRow {
  std::string space;
  double mean = 0.0, std_dev = 0.0, min = 0.0, max = 0.0;
  std::vector<double> minima;  // per replicate
};

/// Four restricted estimations per replicate on shared data (Brownian 2-d):
/// the full family, the forced-trend (integrated, no cointegration) family,
/// the wrong-cointegration family with C1 = (0,1)^T and the stationary
/// family.
std::vector<MisspecificationRow> misspecification_study(
    const ExperimentConfig& cfg);

struct RateStudyResult {
  std::vector<int> sizes;
  Matrix std_by_size;   // sizes x s
  Vector slopes;        // per coordinate, log std vs log n
  std::vector<MonteCarloSummary> summaries;
};

RateStudyResult rate_study(const ExperimentConfig& cfg);

/// Renders a True/Mean/Bias/Std table from summary files and emits
/// per-coordinate QQ data (sorted standardized estimates against normal
/// quantiles) next to them. Throws on missing or empty inputs.
std::string report(const std::vector<std::string>& summary_paths,
                   const std::string& qq_source_replicates = "",
                   const std::string& qq_out_dir = "");

double normal_quantile(double p);

}  // namespace coinss
