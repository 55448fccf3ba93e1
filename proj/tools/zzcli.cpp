// Command-line harness: dataset generation/ingestion, sampler runs,
// diagnostics, and the scripted experiment suites. Exit codes: 0 ok,
// 2 invalid configuration, 3 runtime bound violation.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "zz/data.hpp"
#include "zz/diagnostics.hpp"
#include "zz/experiments.hpp"
#include "zz/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_gen(const std::string& out_path, int n, int p, double alpha,
            const std::string& rho, const std::string& response, int k,
            const std::string& xi_mode, std::uint64_t seed,
            const std::string& report_path) {
  zz::SynthSpec spec;
  spec.n = n;
  spec.p = p;
  spec.alpha = alpha;
  if (rho == "normal")
    spec.rho = zz::SmoothDensity::normal;
  else if (rho == "laplace")
    spec.rho = zz::SmoothDensity::laplace;
  else
    throw zz::ConfigError("gen: rho must be normal or laplace");
  if (response == "model") {
    spec.response = zz::SynthSpec::ResponseMode::from_model;
  } else if (response == "ones") {
    spec.response = zz::SynthSpec::ResponseMode::fixed_ones;
    spec.fixed_k = k;
  } else {
    throw zz::ConfigError("gen: response must be model or ones");
  }
  if (xi_mode == "normal") {
    zz::Rng rng(zz::derive_seed(seed, 0x78692074727565ULL));
    spec.xi_true.resize(static_cast<std::size_t>(p));
    for (double& v : spec.xi_true) v = rng.normal();
  } else if (xi_mode != "unit") {
    throw zz::ConfigError("gen: xi-true must be unit or normal");
  }

  const zz::Dataset data = zz::generate(spec, seed);
  zz::save_csv(data, out_path);
  if (!report_path.empty()) {
    json rep;
    rep["n"] = data.n();
    rep["p"] = data.p();
    int pos = 0;
    for (int j = 0; j < data.n(); ++j) pos += data.response(j);
    rep["positives"] = pos;
    rep["nnz"] = data.nnz();
    rep["xi_true"] = zz::resolve_xi_true(spec, seed);
    json zf = json::array();
    for (int i = 0; i < data.p(); ++i)
      zf.push_back(1.0 - static_cast<double>(data.column(i).size()) / data.n());
    rep["zero_fraction"] = zf;
    std::ofstream f(report_path);
    f << rep.dump(2) << "\n";
  }
  std::printf("wrote %s (n=%d, p=%d, nnz=%zu)\n", out_path.c_str(), data.n(), data.p(),
              data.nnz());
  return 0;
}

int cmd_sample(const std::string& data_path, const std::string& response_column,
               const std::string& scheme, const std::string& prior,
               std::uint64_t attempts, std::uint64_t seed,
               const std::string& precondition, const std::string& record,
               const std::string& out_dir) {
  zz::CsvOptions opts;
  opts.response_column = response_column;
  zz::IngestionReport report;
  const zz::Dataset data = zz::load_csv(data_path, opts, &report);

  zz::RunConfig rc;
  rc.n_attempts = attempts;
  rc.seed = seed;
  rc.precondition = zz::parse_precondition(precondition);
  if (record == "full")
    rc.record_mode = zz::RecordMode::full_state;
  else if (record == "flips")
    rc.record_mode = zz::RecordMode::flips_only;
  else
    throw zz::ConfigError("sample: record must be full or flips");

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "ingestion.json");
    f << report.to_json() << "\n";
  }
  const zz::SingleRunOutput out = zz::run_single(data, zz::parse_prior(prior),
                                                 zz::parse_scheme(scheme), rc, out_dir);
  std::printf("sampled %llu attempts, %llu flips, total time %s\n",
              static_cast<unsigned long long>(out.result.stats.attempts),
              static_cast<unsigned long long>(out.result.stats.flips),
              g17(out.result.skeleton.total_time()).c_str());
  return 0;
}

int cmd_diag(const std::string& run_dir, int min_samples, double from_time) {
  const zz::Skeleton skeleton = zz::read_skeleton(run_dir);
  const zz::MixingReport report = zz::mixing_report(skeleton, from_time, min_samples);

  json diag;
  diag["n_samples"] = report.n_samples;
  diag["delta_t"] = report.delta_t;
  const bool defined = std::isfinite(report.mixing_time);
  diag["iact_defined"] = defined;
  diag["mixing_time"] = defined ? json(report.mixing_time) : json();
  json per_dim = json::array();
  for (double v : report.iact_per_dim)
    per_dim.push_back(std::isfinite(v) ? json(v) : json());
  diag["iact_per_dim"] = per_dim;
  diag["ess"] = report.ess;
  if (skeleton.total_time() > 0.0) {
    const zz::TrajectoryMoments m = zz::integrate_moments(skeleton);
    diag["trajectory_mean"] = m.mean();
    diag["trajectory_variance"] = m.variance();
  }
  std::ofstream f(fs::path(run_dir) / "diag.json");
  f << diag.dump(2) << "\n";

  std::ofstream csv(fs::path(run_dir) / "iact.csv");
  csv << "dim,iact,ess\n";
  for (std::size_t i = 0; i < report.iact_per_dim.size(); ++i) {
    csv << i << ","
        << (std::isfinite(report.iact_per_dim[i]) ? g17(report.iact_per_dim[i]) : "inf")
        << "," << g17(report.ess[i]) << "\n";
  }
  if (!defined)
    std::printf("diag: iact undefined (trajectory too short or constant)\n");
  else
    std::printf("diag: mixing time %s over %d samples (delta_t %s)\n",
                g17(report.mixing_time).c_str(), report.n_samples,
                g17(report.delta_t).c_str());
  return 0;
}

int cmd_experiment(const std::string& kind, const std::string& config_path,
                   const std::string& out_dir, std::uint64_t seed, int replicates,
                   std::uint64_t attempts, int jobs, const std::string& scheme,
                   const std::string& prior, const std::string& data_csv) {
  zz::ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw zz::ConfigError("experiment: cannot open config " + config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    cfg = zz::ExperimentConfig::from_json(ss.str());
  }
  if (!kind.empty()) cfg.kind = zz::parse_experiment_kind(kind);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed != 0) cfg.base_seed = seed;
  if (replicates != 0) cfg.replicates = replicates;
  if (attempts != 0) cfg.attempts = attempts;
  if (jobs != 0) cfg.jobs = jobs;
  if (!scheme.empty()) cfg.scheme = zz::parse_scheme(scheme);
  if (!prior.empty()) cfg.prior = zz::parse_prior(prior);
  if (!data_csv.empty()) cfg.data_csv = data_csv;

  const std::vector<std::string> files = zz::run_experiment(cfg);
  for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zig-zag sampler with generalized sub-sampling"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV");
  std::string gen_out = "data.csv", gen_rho = "normal", gen_response = "model";
  std::string gen_xi = "unit", gen_report;
  int gen_n = 200, gen_p = 5, gen_k = 0;
  double gen_alpha = 1.0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "output CSV path");
  gen->add_option("--n", gen_n, "observations");
  gen->add_option("--p", gen_p, "dimensions");
  gen->add_option("--alpha", gen_alpha, "nonzero covariate probability");
  gen->add_option("--rho", gen_rho, "smooth density: normal|laplace");
  gen->add_option("--response", gen_response, "response mode: model|ones");
  gen->add_option("--k", gen_k, "number of ones for --response ones");
  gen->add_option("--xi-true", gen_xi, "true coefficients: unit|normal");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--report", gen_report, "write a generation report JSON");

  // sample
  auto* sample = app.add_subcommand("sample", "run the sampler on a dataset CSV");
  std::string s_data, s_response = "y", s_scheme = "importance";
  std::string s_prior = "gaussian:1", s_precond = "off", s_record = "flips";
  std::string s_out;
  std::uint64_t s_attempts = 100000, s_seed = 1;
  sample->add_option("--data", s_data, "dataset CSV")->required();
  sample->add_option("--response-column", s_response, "response column name");
  sample->add_option("--scheme", s_scheme,
                     "uniform|importance|stratified[,iw][,cv][,m=<int>]");
  sample->add_option("--prior", s_prior,
                     "gaussian:<var>|cauchy:<s>|gdp:<a>,<t>|laplace:<b>");
  sample->add_option("--attempts", s_attempts, "bouncing attempts");
  sample->add_option("--seed", s_seed, "RNG seed");
  sample->add_option("--precondition", s_precond, "off|adaptive:<every>,<freeze>");
  sample->add_option("--record", s_record, "skeleton record mode: flips|full");
  sample->add_option("--out", s_out, "output directory");

  // diag
  auto* diag = app.add_subcommand("diag", "diagnostics for a recorded run");
  std::string d_run;
  int d_min_samples = 10000;
  double d_from = 0.0;
  diag->add_option("--run", d_run, "run directory (from sample --out)")->required();
  diag->add_option("--min-samples", d_min_samples, "discretized sample count");
  diag->add_option("--from-time", d_from, "discard trajectory before this time");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a scripted experiment suite");
  std::string e_kind, e_config, e_out, e_scheme, e_prior, e_data;
  std::uint64_t e_seed = 0, e_attempts = 0;
  int e_replicates = 0, e_jobs = 0;
  exp->add_option("--kind", e_kind,
                  "scaling_alpha|scaling_n|cv_imbalance|highdim|single_run");
  exp->add_option("--config", e_config, "JSON config (or a previous manifest)");
  exp->add_option("--out", e_out, "output directory");
  exp->add_option("--seed", e_seed, "base seed");
  exp->add_option("--replicates", e_replicates, "replicates per grid point");
  exp->add_option("--attempts", e_attempts, "bouncing attempts per run");
  exp->add_option("--jobs", e_jobs, "max concurrent replicates");
  exp->add_option("--scheme", e_scheme, "scheme for single_run");
  exp->add_option("--prior", e_prior, "prior override");
  exp->add_option("--data", e_data, "dataset CSV for single_run");

  try {
    app.parse(argc, argv);
    if (gen->parsed())
      return cmd_gen(gen_out, gen_n, gen_p, gen_alpha, gen_rho, gen_response, gen_k,
                     gen_xi, gen_seed, gen_report);
    if (sample->parsed())
      return cmd_sample(s_data, s_response, s_scheme, s_prior, s_attempts, s_seed,
                        s_precond, s_record, s_out);
    if (diag->parsed()) return cmd_diag(d_run, d_min_samples, d_from);
    if (exp->parsed())
      return cmd_experiment(e_kind, e_config, e_out, e_seed, e_replicates, e_attempts,
                            e_jobs, e_scheme, e_prior, e_data);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const zz::BoundViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const zz::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
