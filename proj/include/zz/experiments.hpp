#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zz/data.hpp"
#include "zz/dataset.hpp"
#include "zz/diagnostics.hpp"
#include "zz/prior.hpp"
#include "zz/subsample.hpp"
#include "zz/zigzag.hpp"

namespace zz {

// Posterior mode by damped Newton iterations (deterministic). Non-Gaussian
// priors use a curvature surrogate for the prior block; the result only
// serves as a reference point, not as an exact optimum.
std::vector<double> find_mode(const Dataset& data, const Prior& prior,
                              int max_iter = 100, double grad_tol = 1e-10);

// Scheme described as on the command line: "uniform", "importance,cv",
// "stratified,m=32", ... Throws ConfigError on unknown tokens.
SchemeConfig parse_scheme(const std::string& text);
std::string scheme_to_string(const SchemeConfig& config);

// "gaussian:<var>", "cauchy:<s>", "gdp:<a>,<t>", "laplace:<b>"
Prior parse_prior(const std::string& text);
std::string prior_to_string(const Prior& prior);

// "off" or "adaptive:<update_every>,<freeze_after>"
PreconditionConfig parse_precondition(const std::string& text);
std::string precondition_to_string(const PreconditionConfig& config);

enum class ExperimentKind { scaling_alpha, scaling_n, cv_imbalance, highdim, single_run };

ExperimentKind parse_experiment_kind(const std::string& text);
const char* experiment_kind_name(ExperimentKind kind);

// Full description of an experiment suite. Serializes losslessly to JSON;
// replaying a manifest reproduces every output byte for byte.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::single_run;
  std::uint64_t base_seed = 1;
  int replicates = 10;
  std::uint64_t attempts = 100000;
  int jobs = 1;
  std::string out_dir = ".";

  // synthetic data parameters (kind-dependent defaults applied by normalize())
  int n = 0;
  int p = 0;
  double alpha = 1.0;
  SmoothDensity rho = SmoothDensity::normal;
  std::string xi_true_mode = "unit";  // "unit" | "normal"
  Prior prior = Prior::gaussian(1.0);

  std::vector<double> alpha_grid;  // scaling_alpha
  std::vector<int> n_grid;         // scaling_n
  std::vector<int> k_grid;         // cv_imbalance
  PreconditionConfig precondition; // highdim variant
  double scale_span = 0.0;         // highdim: geometric column-scale ramp width

  SchemeConfig scheme;             // single_run
  std::string data_csv;            // single_run with real data
  std::string response_column = "y";
  RecordMode record_mode = RecordMode::flips_only;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  void normalize();  // fills kind-dependent defaults, validates
};

// Runs the suite and writes manifest.json plus the result CSVs into
// config.out_dir. Returns the paths of every file written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

struct SingleRunOutput {
  RunResult result;
  std::vector<std::string> files;
};

// One sampler run on the given dataset; writes manifest.json, skeleton.csv
// and summary.json into out_dir (out_dir empty: nothing written).
SingleRunOutput run_single(const Dataset& data, const Prior& prior,
                           const SchemeConfig& scheme_cfg, const RunConfig& run_cfg,
                           const std::string& out_dir);

// Skeleton round-trip used by the diag command.
void write_skeleton(const Skeleton& skeleton, const RunStats& stats,
                    const std::string& dir);
Skeleton read_skeleton(const std::string& dir);

// Synthetic stand-in for the cervical cancer dataset: n=858, p=34, exactly
// 18 positive responses, 80% zeros per column.
Dataset cancer_surrogate(std::uint64_t seed);

// Total simulated process time of one run (helper shared by the scaling
// experiments and the acceptance suite).
double total_time_after(const Dataset& data, const Prior& prior,
                        const SchemeConfig& scheme_cfg, std::uint64_t attempts,
                        std::uint64_t seed);

}  // namespace zz
