#include "coinss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace coinss {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

Matrix parse_matrix(const std::string& text) {
  // rows separated by ';', entries by ','
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    auto vals = parse_double_list(row);
    if (!vals.empty()) rows.push_back(vals);
  }
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::invalid_argument("config: ragged matrix literal");
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string render_matrix(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    if (i) out += ";";
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += fmt(m(i, j));
    }
  }
  return out;
}

std::string render_list(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v(i));
  }
  return out;
}

/// Runs job(i) for i in [0, count) on `workers` threads; results land in a
/// caller-maintained vector indexed by i, so the fold over results is
/// scheduling-independent.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_config_text(
    const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig ExperimentConfig::from_kv(
    const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  auto geti = [&](const char* k, int& out) {
    if (kv.count(k)) out = std::stoi(kv.at(k));
  };
  auto getd = [&](const char* k, double& out) {
    if (kv.count(k)) out = std::stod(kv.at(k));
  };
  auto gets = [&](const char* k, std::string& out) {
    if (kv.count(k)) out = kv.at(k);
  };
  gets("model", cfg.model);
  if (kv.count("model_file")) cfg.model_file = kv.at("model_file");
  gets("driver", cfg.driver);
  getd("nig.alpha", cfg.nig_alpha);
  getd("nig.delta", cfg.nig_delta);
  if (kv.count("nig.beta")) {
    auto v = parse_double_list(kv.at("nig.beta"));
    cfg.nig_beta = Eigen::Map<const Vector>(v.data(), v.size());
  }
  if (kv.count("nig.Delta")) cfg.nig_Delta = parse_matrix(kv.at("nig.Delta"));
  if (kv.count("nig.mu")) {
    if (trim(kv.at("nig.mu")) == "center") {
      cfg.nig_center = true;
    } else {
      cfg.nig_center = false;
      auto v = parse_double_list(kv.at("nig.mu"));
      cfg.nig_mu = Eigen::Map<const Vector>(v.data(), v.size());
    }
  }
  geti("replicates", cfg.replicates);
  geti("n", cfg.n);
  getd("h", cfg.h);
  getd("euler_dt", cfg.euler_dt);
  getd("burn_in", cfg.burn_in);
  gets("scheme", cfg.scheme);
  if (kv.count("seed")) cfg.seed = std::stoull(kv.at("seed"));
  gets("out", cfg.out);
  geti("workers", cfg.workers);
  geti("starts", cfg.starts);
  getd("start_spread", cfg.start_spread);
  geti("max_evals", cfg.max_evals);
  getd("tol_x", cfg.tol_x);
  getd("tol_f", cfg.tol_f);
  geti("restarts", cfg.restarts);
  geti("bandwidth", cfg.bandwidth);
  if (kv.count("sizes")) {
    cfg.sizes.clear();
    for (double v : parse_double_list(kv.at("sizes")))
      cfg.sizes.push_back(static_cast<int>(v));
  }
  if (cfg.replicates < 1)
    throw std::invalid_argument("config: replicates must be >= 1");
  if (cfg.n < 2) throw std::invalid_argument("config: n must be >= 2");
  if (cfg.scheme != "euler" && cfg.scheme != "exact-gaussian")
    throw std::invalid_argument("config: unknown scheme " + cfg.scheme);
  if (cfg.driver != "brownian" && cfg.driver != "nig")
    throw std::invalid_argument("config: unknown driver " + cfg.driver);
  if (cfg.driver == "nig" && cfg.scheme == "exact-gaussian")
    throw std::invalid_argument(
        "config: exact-gaussian scheme requires the brownian driver");
  return cfg;
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["model"] = model;
  if (model_file) kv["model_file"] = *model_file;
  kv["driver"] = driver;
  if (driver == "nig") {
    kv["nig.alpha"] = fmt(nig_alpha);
    kv["nig.delta"] = fmt(nig_delta);
    kv["nig.beta"] = render_list(nig_beta);
    kv["nig.Delta"] = render_matrix(nig_Delta);
    kv["nig.mu"] = nig_center ? "center" : render_list(nig_mu);
  }
  kv["replicates"] = std::to_string(replicates);
  kv["n"] = std::to_string(n);
  kv["h"] = fmt(h);
  kv["euler_dt"] = fmt(euler_dt);
  kv["burn_in"] = fmt(burn_in);
  kv["scheme"] = scheme;
  kv["seed"] = std::to_string(seed);
  kv["out"] = out;
  kv["workers"] = std::to_string(workers);
  kv["starts"] = std::to_string(starts);
  kv["start_spread"] = fmt(start_spread);
  kv["max_evals"] = std::to_string(max_evals);
  kv["tol_x"] = fmt(tol_x);
  kv["tol_f"] = fmt(tol_f);
  kv["restarts"] = std::to_string(restarts);
  kv["bandwidth"] = std::to_string(bandwidth);
  std::string sz;
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (i) sz += ",";
    sz += std::to_string(sizes[i]);
  }
  kv["sizes"] = sz;
  return kv;
}

ModelSpec ExperimentConfig::resolve_model() const {
  if (model_file) return load_model_spec(read_config_file(*model_file));
  return model_by_name(model);
}

LevyConfig ExperimentConfig::resolve_driver(const ModelSpec& spec,
                                            const Vector& theta) const {
  StateSpaceRealization r = build_matrices(spec, theta);
  if (driver == "brownian") return LevyConfig::brownian(r.SigmaL);
  Vector beta = nig_beta;
  Matrix big = nig_Delta;
  if (beta.size() == 0 || big.size() == 0) {
    // default parameter sets for the shipped models
    if (spec.m == 2) {
      beta = Vector::Ones(2);
      big = Matrix(2, 2);
      big << 1.25, -0.5, -0.5, 1.0;
    } else if (spec.m == 3) {
      beta = Vector::Ones(3);
      big = Matrix(3, 3);
      const double s3 = std::sqrt(3.0);
      big << 1.25, -0.5, s3 / 6.0,
             -0.5, 1.0, -s3 / 3.0,
             s3 / 6.0, -s3 / 3.0, 4.0 / 3.0;
    } else {
      throw std::invalid_argument(
          "config: nig.beta / nig.Delta required for this model dimension");
    }
  }
  return LevyConfig::nig(nig_alpha, beta, nig_delta, big,
                         nig_center ? Vector() : nig_mu, nig_center);
}

Vector ExperimentConfig::resolve_truth(const ModelSpec& spec) const {
  if (spec.theta_true.size() != spec.s)
    throw std::invalid_argument(
        "config: model has no recorded true parameter; provide theta_true");
  Vector truth = spec.theta_true;
  if (driver == "nig") {
    // replace the Sigma_L coordinates with the exact NIG covariance so the
    // simulated process matches the model realization
    const LevyConfig cfg = resolve_driver(spec, truth);
    const Matrix cov = levy_covariance(cfg);
    StateSpaceRealization r = build_matrices(spec, truth);
    // locate the vech(Sigma_L) coordinates by probing the builder
    int idx = 0;
    for (int j = 0; j < spec.m; ++j)
      for (int i = j; i < spec.m; ++i) {
        // find which theta coordinate feeds SigmaL(i,j)
        for (int k = 0; k < spec.s; ++k) {
          Vector probe = truth;
          probe(k) += 1.0;
          StateSpaceRealization rp = build_matrices(spec, probe);
          if (std::abs(rp.SigmaL(i, j) - r.SigmaL(i, j) - 1.0) < 1e-12) {
            truth(k) = cov(i, j);
            break;
          }
        }
        ++idx;
      }
  }
  return truth;
}

EstimateOptions ExperimentConfig::estimate_options() const {
  EstimateOptions opts;
  opts.optimizer.max_evals = max_evals;
  opts.optimizer.tol_x = tol_x;
  opts.optimizer.tol_f = tol_f;
  opts.optimizer.restarts = restarts;
  opts.bandwidth = bandwidth;
  return opts;
}

MonteCarloSummary summarize(const std::vector<ReplicateRecord>& records,
                            const Vector& truth) {
  MonteCarloSummary s;
  s.truth = truth;
  s.replicates = static_cast<int>(records.size());
  const int p = static_cast<int>(truth.size());
  s.mean = Vector::Zero(p);
  s.bias = Vector::Zero(p);
  s.std_dev = Vector::Zero(p);
  int ok = 0;
  for (const auto& r : records)
    if (r.ok()) {
      s.mean += r.theta;
      ++ok;
    }
  s.failures = s.replicates - ok;
  if (ok == 0) return s;
  s.mean /= ok;
  s.bias = truth - s.mean;
  if (ok > 1) {
    for (const auto& r : records)
      if (r.ok()) s.std_dev += (r.theta - s.mean).cwiseAbs2();
    s.std_dev = (s.std_dev / (ok - 1)).cwiseSqrt();
  }
  return s;
}

void write_replicates_csv(const std::vector<ReplicateRecord>& records,
                          const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  const int p = records.empty() ? 0
                                : static_cast<int>(records.front().ok()
                                                       ? records.front().theta.size()
                                                       : 0);
  int pmax = p;
  for (const auto& r : records)
    pmax = std::max(pmax, static_cast<int>(r.theta.size()));
  f << "replicate,seed,status,iters,loglik";
  for (int i = 1; i <= pmax; ++i) f << ",theta_" << i;
  f << "\n";
  for (const auto& r : records) {
    f << r.replicate << ',' << r.seed << ',' << r.status << ',' << r.iterations
      << ',' << fmt(r.loglik);
    for (int i = 0; i < pmax; ++i)
      f << ',' << (i < r.theta.size() ? fmt(r.theta(i)) : std::string("nan"));
    f << "\n";
  }
}

std::vector<ReplicateRecord> read_replicates_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty csv " + path);
  int p = -5;
  for (char ch : line)
    if (ch == ',') ++p;
  std::vector<ReplicateRecord> out;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    ReplicateRecord r;
    std::getline(ss, tok, ','); r.replicate = std::stoi(tok);
    std::getline(ss, tok, ','); r.seed = std::stoull(tok);
    std::getline(ss, r.status, ',');
    std::getline(ss, tok, ','); r.iterations = std::stoi(tok);
    std::getline(ss, tok, ','); r.loglik = std::stod(tok);
    std::vector<double> th;
    bool any_nan = false;
    for (int i = 0; i < p; ++i) {
      if (!std::getline(ss, tok, ',')) break;
      const double v = std::strtod(tok.c_str(), nullptr);
      if (tok == "nan" || std::isnan(v)) any_nan = true;
      th.push_back(v);
    }
    if (!any_nan && !th.empty())
      r.theta = Eigen::Map<const Vector>(th.data(), th.size());
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(const MonteCarloSummary& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "# replicates = " << s.replicates << "\n";
  f << "# failures = " << s.failures << "\n";
  f << "coordinate,true,mean,bias,std\n";
  for (Index i = 0; i < s.truth.size(); ++i)
    f << "theta_" << (i + 1) << ',' << fmt(s.truth(i)) << ',' << fmt(s.mean(i))
      << ',' << fmt(s.bias(i)) << ',' << fmt(s.std_dev(i)) << "\n";
}

MonteCarloSummary read_summary_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  MonteCarloSummary s;
  std::string line;
  std::vector<double> tr, mn, bi, sd;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.find("replicates") != std::string::npos && eq != std::string::npos)
        s.replicates = std::stoi(trim(line.substr(eq + 1)));
      if (line.find("failures") != std::string::npos && eq != std::string::npos)
        s.failures = std::stoi(trim(line.substr(eq + 1)));
      continue;
    }
    if (line.rfind("coordinate", 0) == 0) continue;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ','); tr.push_back(std::stod(tok));
    std::getline(ss, tok, ','); mn.push_back(std::stod(tok));
    std::getline(ss, tok, ','); bi.push_back(std::stod(tok));
    std::getline(ss, tok, ','); sd.push_back(std::stod(tok));
  }
  const int p = static_cast<int>(tr.size());
  if (p == 0) throw std::runtime_error("summary csv has no rows: " + path);
  s.truth = Eigen::Map<const Vector>(tr.data(), p);
  s.mean = Eigen::Map<const Vector>(mn.data(), p);
  s.bias = Eigen::Map<const Vector>(bi.data(), p);
  s.std_dev = Eigen::Map<const Vector>(sd.data(), p);
  return s;
}

namespace {

ObservationSeries simulate_for(const ExperimentConfig& cfg,
                               const ModelSpec& spec, const Vector& truth,
                               std::uint64_t sim_seed, int n_override = -1) {
  StateSpaceRealization r = build_realization(spec, truth);
  RngStream rng(sim_seed);
  const int n = n_override > 0 ? n_override : cfg.n;
  ObservationSeries series;
  if (cfg.scheme == "exact-gaussian") {
    series = simulate_exact_gaussian(r, cfg.h, n, rng);
  } else {
    EulerOptions opts;
    opts.T = n * cfg.h;
    opts.euler_dt = cfg.euler_dt;
    opts.h = cfg.h;
    opts.burn_in = cfg.burn_in;
    series = simulate_euler(r, cfg.resolve_driver(spec, truth), opts, rng);
  }
  series.seed = sim_seed;
  return series;
}

ReplicateRecord run_one_replicate(const ExperimentConfig& cfg,
                                  const ModelSpec& spec, const Vector& truth,
                                  int replicate_index, int n_override = -1,
                                  std::uint64_t index_key = 0) {
  ReplicateRecord rec;
  rec.replicate = replicate_index;
  const std::uint64_t key = index_key ? index_key
                                      : static_cast<std::uint64_t>(replicate_index);
  rec.seed = derive_seed(cfg.seed, key, stage::kSimulate);
  try {
    ObservationSeries series = simulate_for(cfg, spec, truth, rec.seed, n_override);
    RngStream est_rng(derive_seed(cfg.seed, key, stage::kEstimate));
    const auto starts =
        make_starts(spec, cfg.starts, truth, cfg.start_spread, est_rng);
    EstimationResult est = qml_estimate(spec, series, starts,
                                        cfg.estimate_options());
    rec.status = to_string(est.status);
    rec.iterations = est.iterations;
    rec.loglik = est.loglik;
    rec.theta = est.theta;
  } catch (const std::exception& ex) {
    rec.status = std::string("failed:") + ex.what();
  }
  return rec;
}

}  // namespace

MonteCarloRun run_replicates(const ExperimentConfig& cfg,
                             const std::string& out_dir) {
  const ModelSpec spec = cfg.resolve_model();
  const Vector truth = cfg.resolve_truth(spec);

  std::vector<ReplicateRecord> records(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](int i) {
    records[i] = run_one_replicate(cfg, spec, truth, i + 1);
  });

  MonteCarloRun run;
  run.records = std::move(records);
  run.summary = summarize(run.records, truth);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_replicates_csv(run.records, out_dir + "/replicates.csv");
    write_summary_csv(run.summary, out_dir + "/summary.csv");
  }
  return run;
}

std::vector<MisspecificationRow> misspecification_study(
    const ExperimentConfig& cfg) {
  if (cfg.model != "canonical2d")
    throw std::invalid_argument("misspecification study is defined for canonical2d");
  if (cfg.driver != "brownian")
    throw std::invalid_argument("misspecification study uses the brownian driver");

  const ModelSpec full = make_canonical2d();
  const Vector truth = full.theta_true;

  struct Space {
    ModelSpec spec;
    Vector start_center;
  };
  std::vector<Space> spaces;
  spaces.push_back({full, truth});
  {
    ModelSpec s = make_canonical2d_integrated();
    spaces.push_back({s, truth});  // same coordinates, forced trend block
  }
  {
    ModelSpec s = make_canonical2d_fixed_c1();
    spaces.push_back({s, truth.head(12)});
  }
  {
    ModelSpec s = make_canonical2d_stationary();
    Vector c(10);
    c.head(7) = truth.head(7);
    c.tail(3) = truth.segment(9, 3);
    spaces.push_back({s, c});
  }
  const char* names[4] = {"Theta", "Theta_I", "Theta_W", "Theta_S"};

  Matrix minima(cfg.replicates, 4);
  parallel_for(cfg.replicates, cfg.workers, [&](int i) {
    const std::uint64_t sim_seed =
        derive_seed(cfg.seed, i + 1, stage::kSimulate);
    ObservationSeries series = simulate_for(cfg, full, truth, sim_seed);
    for (int sp = 0; sp < 4; ++sp) {
      RngStream est_rng(derive_seed(cfg.seed, (sp + 1) * 1000003ULL + i + 1,
                                    stage::kEstimate));
      const auto starts = make_starts(spaces[sp].spec, cfg.starts,
                                      spaces[sp].start_center,
                                      cfg.start_spread, est_rng);
      try {
        EstimationResult est = qml_estimate(spaces[sp].spec, series, starts,
                                            cfg.estimate_options());
        minima(i, sp) = est.loglik;
      } catch (const std::exception&) {
        minima(i, sp) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });

  std::vector<MisspecificationRow> rows;
  for (int sp = 0; sp < 4; ++sp) {
    MisspecificationRow row;
    row.space = names[sp];
    std::vector<double> vals;
    for (int i = 0; i < cfg.replicates; ++i)
      if (std::isfinite(minima(i, sp))) vals.push_back(minima(i, sp));
    row.minima = vals;
    if (!vals.empty()) {
      double sum = 0.0;
      row.min = vals[0];
      row.max = vals[0];
      for (double v : vals) {
        sum += v;
        row.min = std::min(row.min, v);
        row.max = std::max(row.max, v);
      }
      row.mean = sum / vals.size();
      double ss = 0.0;
      for (double v : vals) ss += (v - row.mean) * (v - row.mean);
      row.std_dev = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RateStudyResult rate_study(const ExperimentConfig& cfg) {
  if (cfg.sizes.size() < 3)
    throw std::invalid_argument("rate study needs at least 3 sample sizes");
  {
    const auto [mn, mx] =
        std::minmax_element(cfg.sizes.begin(), cfg.sizes.end());
    if (*mx < 8 * *mn)
      throw std::invalid_argument("rate study sizes must span an 8x range");
  }
  const ModelSpec spec = cfg.resolve_model();
  const Vector truth = cfg.resolve_truth(spec);

  RateStudyResult out;
  out.sizes = cfg.sizes;
  out.std_by_size.resize(cfg.sizes.size(), spec.s);
  for (size_t si = 0; si < cfg.sizes.size(); ++si) {
    std::vector<ReplicateRecord> records(cfg.replicates);
    parallel_for(cfg.replicates, cfg.workers, [&](int i) {
      const std::uint64_t key =
          (static_cast<std::uint64_t>(si) << 32) + static_cast<std::uint64_t>(i + 1);
      records[i] = run_one_replicate(cfg, spec, truth, i + 1,
                                     cfg.sizes[si], key);
    });
    MonteCarloSummary s = summarize(records, truth);
    out.summaries.push_back(s);
    out.std_by_size.row(si) = s.std_dev.transpose();
  }

  // least squares slope of log std against log n per coordinate
  out.slopes.resize(spec.s);
  const int k = static_cast<int>(cfg.sizes.size());
  Vector lx(k);
  for (int i = 0; i < k; ++i) lx(i) = std::log(static_cast<double>(cfg.sizes[i]));
  const double lxm = lx.mean();
  for (int j = 0; j < spec.s; ++j) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < k; ++i) {
      const double ly = std::log(out.std_by_size(i, j));
      num += (lx(i) - lxm) * ly;
      den += (lx(i) - lxm) * (lx(i) - lxm);
    }
    out.slopes(j) = num / den;
  }
  return out;
}

double normal_quantile(double p) {
  // Acklam's rational approximation, |relative error| < 1.15e-9
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::string report(const std::vector<std::string>& summary_paths,
                   const std::string& qq_source_replicates,
                   const std::string& qq_out_dir) {
  if (summary_paths.empty())
    throw std::invalid_argument("report: no summary files given");
  std::ostringstream os;
  char buf[160];
  for (const auto& path : summary_paths) {
    MonteCarloSummary s = read_summary_csv(path);
    if (s.truth.size() == 0)
      throw std::runtime_error("report: empty summary " + path);
    os << "== " << path << "  (replicates = " << s.replicates
       << ", failures = " << s.failures << ")\n";
    os << "  coordinate        True        Mean        Bias    Std.dev.\n";
    for (Index i = 0; i < s.truth.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "  theta_%-4d %11.4f %11.4f %11.4f %11.4f\n",
                    static_cast<int>(i + 1), s.truth(i), s.mean(i), s.bias(i),
                    s.std_dev(i));
      os << buf;
    }
  }

  if (!qq_source_replicates.empty()) {
    auto records = read_replicates_csv(qq_source_replicates);
    std::vector<const ReplicateRecord*> ok;
    for (const auto& r : records)
      if (r.ok()) ok.push_back(&r);
    if (ok.empty()) throw std::runtime_error("report: no successful replicates");
    const int p = static_cast<int>(ok.front()->theta.size());
    const int rr = static_cast<int>(ok.size());
    std::filesystem::create_directories(qq_out_dir.empty() ? "." : qq_out_dir);
    for (int j = 0; j < p; ++j) {
      std::vector<double> vals;
      vals.reserve(rr);
      for (const auto* r : ok) vals.push_back(r->theta(j));
      std::sort(vals.begin(), vals.end());
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= rr;
      double sd = 0.0;
      for (double v : vals) sd += (v - mean) * (v - mean);
      sd = rr > 1 ? std::sqrt(sd / (rr - 1)) : 1.0;
      const std::string dir = qq_out_dir.empty() ? std::string(".") : qq_out_dir;
      std::ofstream f(dir + "/qq_theta_" + std::to_string(j + 1) + ".csv");
      f << "normal_quantile,sample_quantile\n";
      for (int i = 0; i < rr; ++i) {
        const double q = normal_quantile((i + 0.5) / rr);
        const double z = sd > 0 ? (vals[i] - mean) / sd : 0.0;
        f << fmt(q) << ',' << fmt(z) << "\n";
      }
    }
    os << "QQ data written for " << p << " coordinates (" << rr
       << " replicates)\n";
  }
  return os.str();
}

}  // namespace coinss
