#include "zz/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zz/model.hpp"
#include "zz/rng.hpp"
#include "zz/util.hpp"

namespace zz {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static const char* kVersion = "0.1.0";

static std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- posterior mode ----

namespace {

// in-place Cholesky solve of (symmetric positive definite) H d = -g
bool cholesky_solve(std::vector<double>& h, std::vector<double>& d, int p) {
  for (int c = 0; c < p; ++c) {
    double diag = h[static_cast<std::size_t>(c) * p + c];
    for (int k = 0; k < c; ++k) {
      const double l = h[static_cast<std::size_t>(c) * p + k];
      diag -= l * l;
    }
    if (!(diag > 0.0)) return false;
    const double lc = std::sqrt(diag);
    h[static_cast<std::size_t>(c) * p + c] = lc;
    for (int r = c + 1; r < p; ++r) {
      double v = h[static_cast<std::size_t>(r) * p + c];
      for (int k = 0; k < c; ++k)
        v -= h[static_cast<std::size_t>(r) * p + k] * h[static_cast<std::size_t>(c) * p + k];
      h[static_cast<std::size_t>(r) * p + c] = v / lc;
    }
  }
  // forward then backward substitution on -g
  for (int r = 0; r < p; ++r) {
    double v = -d[static_cast<std::size_t>(r)];
    for (int k = 0; k < r; ++k)
      v -= h[static_cast<std::size_t>(r) * p + k] * d[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(r)] = v / h[static_cast<std::size_t>(r) * p + r];
  }
  for (int r = p - 1; r >= 0; --r) {
    double v = d[static_cast<std::size_t>(r)];
    for (int k = r + 1; k < p; ++k)
      v -= h[static_cast<std::size_t>(k) * p + r] * d[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(r)] = v / h[static_cast<std::size_t>(r) * p + r];
  }
  return true;
}

double prior_curvature(const Prior& prior) {
  switch (prior.kind) {
    case PriorKind::gaussian: return 1.0 / prior.variance;
    case PriorKind::cauchy: return 2.0 / (prior.scale * prior.scale);
    // non-smooth at 0; a ridge keeps the Newton system well posed
    case PriorKind::gdp:
      return (1.0 + prior.shape) / (prior.shape * prior.scale * prior.scale) + 1e-6;
    case PriorKind::laplace: return 1e-6;
  }
  return 1e-6;
}

double full_potential(const Dataset& data, const Prior& prior,
                      std::span<const double> xi) {
  return likelihood_potential(data, xi) + prior_potential(prior, xi);
}

}  // namespace

std::vector<double> find_mode(const Dataset& data, const Prior& prior, int max_iter,
                              double grad_tol) {
  const int p = data.p();
  std::vector<double> xi(static_cast<std::size_t>(p), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(p));
  std::vector<double> step(static_cast<std::size_t>(p));
  std::vector<double> hess(static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
  const double curv = prior_curvature(prior);

  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (int i = 0; i < p; ++i) {
      grad[static_cast<std::size_t>(i)] = prior_grad(prior, xi[static_cast<std::size_t>(i)]);
      hess[static_cast<std::size_t>(i) * p + i] = curv;
    }
    for (int j = 0; j < data.n(); ++j) {
      const double z = dot_row(data, j, xi);
      const double s = sigmoid(z);
      const double w = s * (1.0 - s);
      const double r = s - static_cast<double>(data.response(j));
      for (const SparseEntry& a : data.row(j)) {
        grad[static_cast<std::size_t>(a.index)] += a.value * r;
        for (const SparseEntry& b : data.row(j))
          hess[static_cast<std::size_t>(a.index) * p + b.index] += w * a.value * b.value;
      }
    }
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < grad_tol) break;

    step = grad;
    if (!cholesky_solve(hess, step, p)) {
      // fall back to a plain gradient step
      for (int i = 0; i < p; ++i) step[static_cast<std::size_t>(i)] = -grad[static_cast<std::size_t>(i)];
    }
    const double u0 = full_potential(data, prior, xi);
    double gd = 0.0;
    for (int i = 0; i < p; ++i) gd += grad[static_cast<std::size_t>(i)] * step[static_cast<std::size_t>(i)];
    double t = 1.0;
    std::vector<double> trial(xi);
    for (int back = 0; back < 40; ++back) {
      for (int i = 0; i < p; ++i)
        trial[static_cast<std::size_t>(i)] = xi[static_cast<std::size_t>(i)] + t * step[static_cast<std::size_t>(i)];
      if (full_potential(data, prior, trial) <= u0 + 1e-4 * t * gd) break;
      t *= 0.5;
    }
    xi = trial;
  }
  return xi;
}

// ---- config parsing ----

SchemeConfig parse_scheme(const std::string& text) {
  SchemeConfig cfg;
  std::stringstream ss(text);
  std::string tok;
  bool have_family = false;
  bool importance_within = false;
  while (std::getline(ss, tok, ',')) {
    if (tok == "uniform") {
      cfg.family = SchemeFamily::uniform;
      have_family = true;
    } else if (tok == "importance") {
      cfg.family = SchemeFamily::importance;
      have_family = true;
    } else if (tok == "stratified") {
      cfg.family = SchemeFamily::stratified;
      have_family = true;
    } else if (tok == "cv") {
      cfg.control_variate = true;
    } else if (tok == "iw") {
      importance_within = true;
    } else if (tok.rfind("m=", 0) == 0) {
      try {
        cfg.minibatch = std::stoi(tok.substr(2));
      } catch (const std::exception&) {
        throw ConfigError("scheme: bad mini-batch size in '" + text + "'");
      }
      if (cfg.minibatch < 1) throw ConfigError("scheme: mini-batch size must be >= 1");
    } else {
      throw ConfigError("scheme: unknown token '" + tok + "'");
    }
  }
  if (!have_family) throw ConfigError("scheme: missing family in '" + text + "'");
  if (importance_within) {
    if (cfg.family != SchemeFamily::stratified)
      throw ConfigError("scheme: 'iw' applies to the stratified family only");
    cfg.family = SchemeFamily::stratified_importance;
  }
  if (cfg.control_variate && (cfg.family == SchemeFamily::stratified ||
                              cfg.family == SchemeFamily::stratified_importance))
    throw ConfigError("scheme: stratified,cv is not a defined combination");
  return cfg;
}

std::string scheme_to_string(const SchemeConfig& config) {
  std::string s = config.family == SchemeFamily::stratified_importance
                      ? "stratified,iw"
                      : family_name(config.family);
  if (config.control_variate) s += ",cv";
  if (config.minibatch != 1) s += ",m=" + std::to_string(config.minibatch);
  return s;
}

Prior parse_prior(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "gaussian") return Prior::gaussian(std::stod(args));
    if (name == "cauchy") return args.empty() ? Prior::cauchy() : Prior::cauchy(std::stod(args));
    if (name == "laplace") return Prior::laplace(std::stod(args));
    if (name == "gdp") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw ConfigError("prior: gdp needs shape,scale");
      return Prior::gdp(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("prior: bad parameters in '" + text + "'");
  }
  throw ConfigError("prior: unknown variant '" + name + "'");
}

std::string prior_to_string(const Prior& prior) {
  switch (prior.kind) {
    case PriorKind::gaussian: return "gaussian:" + g17(prior.variance);
    case PriorKind::cauchy: return "cauchy:" + g17(prior.scale);
    case PriorKind::gdp: return "gdp:" + g17(prior.shape) + "," + g17(prior.scale);
    case PriorKind::laplace: return "laplace:" + g17(prior.scale);
  }
  return "?";
}

PreconditionConfig parse_precondition(const std::string& text) {
  PreconditionConfig cfg;
  if (text == "off" || text.empty()) return cfg;
  if (text.rfind("adaptive:", 0) == 0) {
    const std::string args = text.substr(9);
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw ConfigError("precondition: adaptive needs <update_every>,<freeze_after>");
    try {
      cfg.adaptive = true;
      cfg.update_every = std::stoull(args.substr(0, comma));
      cfg.freeze_after = std::stoull(args.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("precondition: bad parameters in '" + text + "'");
    }
    if (cfg.update_every < 1) throw ConfigError("precondition: update_every must be >= 1");
    return cfg;
  }
  throw ConfigError("precondition: unknown mode '" + text + "'");
}

std::string precondition_to_string(const PreconditionConfig& config) {
  if (!config.adaptive) return "off";
  return "adaptive:" + std::to_string(config.update_every) + "," +
         std::to_string(config.freeze_after);
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  if (text == "scaling_alpha") return ExperimentKind::scaling_alpha;
  if (text == "scaling_n") return ExperimentKind::scaling_n;
  if (text == "cv_imbalance") return ExperimentKind::cv_imbalance;
  if (text == "highdim") return ExperimentKind::highdim;
  if (text == "single_run") return ExperimentKind::single_run;
  throw ConfigError("experiment: unknown kind '" + text + "'");
}

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::scaling_alpha: return "scaling_alpha";
    case ExperimentKind::scaling_n: return "scaling_n";
    case ExperimentKind::cv_imbalance: return "cv_imbalance";
    case ExperimentKind::highdim: return "highdim";
    case ExperimentKind::single_run: return "single_run";
  }
  return "?";
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["kind"] = experiment_kind_name(kind);
  j["base_seed"] = base_seed;
  j["replicates"] = replicates;
  j["attempts"] = attempts;
  j["jobs"] = jobs;
  j["out_dir"] = out_dir;
  j["n"] = n;
  j["p"] = p;
  j["alpha"] = alpha;
  j["rho"] = rho == SmoothDensity::normal ? "normal" : "laplace";
  j["xi_true_mode"] = xi_true_mode;
  j["prior"] = prior_to_string(prior);
  j["alpha_grid"] = alpha_grid;
  j["n_grid"] = n_grid;
  j["k_grid"] = k_grid;
  j["precondition"] = precondition_to_string(precondition);
  j["scale_span"] = scale_span;
  j["scheme"] = scheme_to_string(scheme);
  j["data_csv"] = data_csv;
  j["response_column"] = response_column;
  j["record_mode"] = record_mode == RecordMode::full_state ? "full_state" : "flips_only";
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (j.contains("config")) j = j["config"];  // accept a whole manifest
  ExperimentConfig cfg;
  try {
    cfg.kind = parse_experiment_kind(j.value("kind", "single_run"));
    cfg.base_seed = j.value("base_seed", std::uint64_t{1});
    cfg.replicates = j.value("replicates", 0);
    cfg.attempts = j.value("attempts", std::uint64_t{0});
    cfg.jobs = j.value("jobs", 1);
    cfg.out_dir = j.value("out_dir", ".");
    cfg.n = j.value("n", 0);
    cfg.p = j.value("p", 0);
    cfg.alpha = j.value("alpha", 0.0);
    cfg.rho = j.value("rho", "normal") == std::string("laplace") ? SmoothDensity::laplace
                                                                 : SmoothDensity::normal;
    cfg.xi_true_mode = j.value("xi_true_mode", "unit");
    cfg.prior = parse_prior(j.value("prior", "gaussian:1"));
    cfg.alpha_grid = j.value("alpha_grid", std::vector<double>{});
    cfg.n_grid = j.value("n_grid", std::vector<int>{});
    cfg.k_grid = j.value("k_grid", std::vector<int>{});
    cfg.precondition = parse_precondition(j.value("precondition", "off"));
    cfg.scale_span = j.value("scale_span", 0.0);
    cfg.scheme = parse_scheme(j.value("scheme", "uniform"));
    cfg.data_csv = j.value("data_csv", "");
    cfg.response_column = j.value("response_column", "y");
    cfg.record_mode = j.value("record_mode", "flips_only") == std::string("full_state")
                          ? RecordMode::full_state
                          : RecordMode::flips_only;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

void ExperimentConfig::normalize() {
  switch (kind) {
    case ExperimentKind::scaling_alpha:
      if (n == 0) n = 500;
      if (p == 0) p = 5;
      if (alpha_grid.empty()) alpha_grid = {0.2, 0.1, 0.05};
      if (replicates == 0) replicates = 10;
      if (attempts == 0) attempts = 100000;
      if (alpha == 0.0) alpha = 1.0;  // unused; grid applies
      break;
    case ExperimentKind::scaling_n:
      if (p == 0) p = 5;
      if (n_grid.empty()) n_grid = {100, 1000, 10000};
      if (alpha == 0.0) alpha = 1.0;
      if (replicates == 0) replicates = 10;
      if (attempts == 0) attempts = 100000;
      break;
    case ExperimentKind::cv_imbalance:
      if (n == 0) n = 5000;
      if (p == 0) p = 10;
      if (alpha == 0.0) alpha = 0.1;
      rho = SmoothDensity::laplace;
      if (k_grid.empty()) k_grid = {2500, 250, 25};
      if (replicates == 0) replicates = 5;
      if (attempts == 0) attempts = 300000;
      break;
    case ExperimentKind::highdim:
      if (n == 0) n = 10000;
      if (p == 0) p = 100;
      if (alpha == 0.0) alpha = 0.05;
      if (xi_true_mode.empty()) xi_true_mode = "normal";
      if (replicates == 0) replicates = 3;
      if (attempts == 0) attempts = 4000000;
      if (scale_span == 0.0) scale_span = 5.0;
      if (scheme.family == SchemeFamily::uniform && scheme.minibatch == 1 &&
          !scheme.control_variate) {
        scheme.family = SchemeFamily::importance;
        scheme.minibatch = 16;
      }
      if (!precondition.adaptive) {
        precondition.adaptive = true;
        precondition.update_every = 1000;
        precondition.freeze_after = attempts / 2;
      }
      break;
    case ExperimentKind::single_run:
      if (data_csv.empty()) {
        if (n == 0) n = 200;
        if (p == 0) p = 5;
        if (alpha == 0.0) alpha = 1.0;
      }
      if (replicates == 0) replicates = 1;
      if (attempts == 0) attempts = 100000;
      break;
  }
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("config: alpha must be in (0,1]");
  for (double a : alpha_grid)
    if (!(a > 0.0) || a > 1.0) throw ConfigError("config: alpha_grid entries must be in (0,1]");
}

// ---- helpers shared by the drivers ----

namespace {

void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs == 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= n_tasks) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ZigZagState zero_state(int p) {
  return ZigZagState::make(std::vector<double>(static_cast<std::size_t>(p), 0.0),
                           std::vector<double>(static_cast<std::size_t>(p), 1.0));
}

SynthSpec synth_from_config(const ExperimentConfig& cfg) {
  SynthSpec spec;
  spec.n = cfg.n;
  spec.p = cfg.p;
  spec.alpha = cfg.alpha;
  spec.rho = cfg.rho;
  return spec;
}

std::vector<double> normal_xi_true(int p, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x78692074727565ULL));
  std::vector<double> xi(static_cast<std::size_t>(p));
  for (double& v : xi) v = rng.normal();
  return xi;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

json state_to_json(const ZigZagState& state) {
  json j;
  j["xi"] = state.xi;
  j["theta"] = state.theta;
  j["alpha"] = state.alpha;
  j["t"] = state.t;
  return j;
}

ZigZagState state_from_json(const json& j) {
  ZigZagState s;
  s.xi = j.at("xi").get<std::vector<double>>();
  s.theta = j.at("theta").get<std::vector<double>>();
  s.alpha = j.at("alpha").get<std::vector<double>>();
  s.t = j.at("t").get<double>();
  return s;
}

}  // namespace

static bool needs_reference(const SchemeConfig& cfg) {
  return cfg.control_variate || cfg.family == SchemeFamily::stratified ||
         cfg.family == SchemeFamily::stratified_importance;
}

double total_time_after(const Dataset& data, const Prior& prior,
                        const SchemeConfig& scheme_cfg, std::uint64_t attempts,
                        std::uint64_t seed) {
  const BoundConstants constants = compute_bound_constants(data);
  std::optional<CVReference> ref;
  if (needs_reference(scheme_cfg)) ref = make_cv_reference(data, find_mode(data, prior));
  const SubsamplingScheme scheme =
      SubsamplingScheme::build(data, constants, scheme_cfg, std::move(ref));
  RunConfig rc;
  rc.n_attempts = attempts;
  rc.seed = seed;
  const RunResult result = run(data, prior, scheme, rc, zero_state(data.p()));
  return result.skeleton.total_time();
}

Dataset cancer_surrogate(std::uint64_t seed) {
  SynthSpec spec;
  spec.n = 858;
  spec.p = 34;
  spec.alpha = 0.2;  // 80% zeros per column
  spec.rho = SmoothDensity::normal;
  spec.response = SynthSpec::ResponseMode::fixed_ones;
  spec.fixed_k = 18;
  return generate(spec, seed);
}

// ---- skeleton round trip ----

void write_skeleton(const Skeleton& skeleton, const RunStats& stats,
                    const std::string& dir) {
  fs::create_directories(dir);
  {
    json meta;
    meta["mode"] = skeleton.mode == RecordMode::full_state ? "full_state" : "flips_only";
    meta["initial"] = state_to_json(skeleton.initial);
    meta["final"] = state_to_json(skeleton.final_state);
    json updates = json::array();
    for (const AlphaUpdate& u : skeleton.alpha_updates) {
      json ju;
      ju["after_event"] = u.after_event;
      ju["t"] = u.t;
      ju["alpha"] = u.alpha;
      updates.push_back(ju);
    }
    meta["alpha_updates"] = updates;
    meta["stats"] = {{"attempts", stats.attempts},
                     {"likelihood_proposals", stats.likelihood_proposals},
                     {"prior_proposals", stats.prior_proposals},
                     {"flips", stats.flips},
                     {"speed_updates", stats.speed_updates},
                     {"min_accept_ratio", stats.min_accept_ratio},
                     {"max_accept_ratio", stats.max_accept_ratio},
                     {"freeze_time", stats.freeze_time}};
    auto out = open_out(fs::path(dir) / "skeleton_meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    auto out = open_out(fs::path(dir) / "skeleton.csv");
    out << "t,dim,kind,accepted\n";
    for (const SkeletonEvent& e : skeleton.events) {
      out << g17(e.t) << "," << e.dim << ","
          << (e.kind == ClockKind::prior ? "prior" : "likelihood") << ","
          << (e.accepted ? 1 : 0) << "\n";
    }
  }
}

Skeleton read_skeleton(const std::string& dir) {
  std::ifstream meta_in(fs::path(dir) / "skeleton_meta.json");
  if (!meta_in) throw std::runtime_error("cannot open skeleton_meta.json in " + dir);
  json meta = json::parse(meta_in);
  Skeleton s;
  s.mode = meta.value("mode", "flips_only") == std::string("full_state")
               ? RecordMode::full_state
               : RecordMode::flips_only;
  s.initial = state_from_json(meta.at("initial"));
  s.final_state = state_from_json(meta.at("final"));
  for (const json& ju : meta.at("alpha_updates")) {
    AlphaUpdate u;
    u.after_event = ju.at("after_event").get<std::size_t>();
    u.t = ju.at("t").get<double>();
    u.alpha = ju.at("alpha").get<std::vector<double>>();
    s.alpha_updates.push_back(std::move(u));
  }

  std::ifstream in(fs::path(dir) / "skeleton.csv");
  if (!in) throw std::runtime_error("cannot open skeleton.csv in " + dir);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SkeletonEvent e;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    e.t = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    e.dim = std::stoi(tok);
    std::getline(ss, tok, ',');
    e.kind = tok == "prior" ? ClockKind::prior : ClockKind::likelihood;
    std::getline(ss, tok, ',');
    e.accepted = tok == "1";
    s.events.push_back(e);
  }
  return s;
}

// ---- single run ----

SingleRunOutput run_single(const Dataset& data, const Prior& prior,
                           const SchemeConfig& scheme_cfg, const RunConfig& run_cfg,
                           const std::string& out_dir) {
  const BoundConstants constants = compute_bound_constants(data);
  std::optional<CVReference> ref;
  std::vector<double> mode;
  if (needs_reference(scheme_cfg)) {
    mode = find_mode(data, prior);
    ref = make_cv_reference(data, mode);
  }
  const SubsamplingScheme scheme =
      SubsamplingScheme::build(data, constants, scheme_cfg, std::move(ref));
  SingleRunOutput out;
  out.result = run(data, prior, scheme, run_cfg, zero_state(data.p()));
  if (out_dir.empty()) return out;

  fs::create_directories(out_dir);
  {
    json manifest;
    manifest["version"] = kVersion;
    manifest["n"] = data.n();
    manifest["p"] = data.p();
    manifest["prior"] = prior_to_string(prior);
    if (prior.kind == PriorKind::cauchy) {
      // constant envelope alpha_i/s from |2u/(1+u^2)| <= 1, chosen over the
      // linear bound; recorded because both are valid and differ
      manifest["cauchy_prior_bound"] = "constant alpha_i/scale";
    }
    manifest["scheme"] = scheme_to_string(scheme_cfg);
    manifest["attempts"] = run_cfg.n_attempts;
    manifest["seed"] = run_cfg.seed;
    manifest["precondition"] = precondition_to_string(run_cfg.precondition);
    manifest["record_mode"] =
        run_cfg.record_mode == RecordMode::full_state ? "full_state" : "flips_only";
    if (!mode.empty()) manifest["xi_star"] = mode;
    auto f = open_out(fs::path(out_dir) / "manifest.json");
    f << manifest.dump(2) << "\n";
    out.files.push_back((fs::path(out_dir) / "manifest.json").string());
  }
  write_skeleton(out.result.skeleton, out.result.stats, out_dir);
  out.files.push_back((fs::path(out_dir) / "skeleton_meta.json").string());
  out.files.push_back((fs::path(out_dir) / "skeleton.csv").string());
  {
    const Skeleton& skel = out.result.skeleton;
    const RunStats& st = out.result.stats;
    json summary;
    summary["total_time"] = skel.total_time();
    summary["events"] = skel.events.size();
    summary["flips"] = st.flips;
    summary["likelihood_proposals"] = st.likelihood_proposals;
    summary["prior_proposals"] = st.prior_proposals;
    summary["speed_updates"] = st.speed_updates;
    summary["min_accept_ratio"] = st.min_accept_ratio;
    summary["max_accept_ratio"] = st.max_accept_ratio;
    summary["freeze_time"] = st.freeze_time;
    if (skel.total_time() > 0.0) {
      const TrajectoryMoments m = integrate_moments(skel);
      summary["trajectory_mean"] = m.mean();
      summary["trajectory_variance"] = m.variance();
    }
    auto f = open_out(fs::path(out_dir) / "summary.json");
    f << summary.dump(2) << "\n";
    out.files.push_back((fs::path(out_dir) / "summary.json").string());
  }
  return out;
}

// ---- experiment drivers ----

namespace {

struct RunRow {
  std::string group;  // alpha / n / k / variant, already formatted
  int replicate = 0;
  std::string scheme;
  std::uint64_t seed = 0;
  double total_time = 0.0;
  double mixing_time = 0.0;
  bool has_mixing = false;
};

void write_manifest(const ExperimentConfig& cfg, std::vector<std::string>& files) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = json::parse(cfg.to_json());
  auto out = open_out(fs::path(cfg.out_dir) / "manifest.json");
  out << manifest.dump(2) << "\n";
  files.push_back((fs::path(cfg.out_dir) / "manifest.json").string());
}

void write_rows(const ExperimentConfig& cfg, const std::string& group_name,
                const std::vector<RunRow>& rows, std::vector<std::string>& files) {
  auto out = open_out(fs::path(cfg.out_dir) / "results.csv");
  out << group_name << ",replicate,scheme,seed,attempts,total_time";
  bool any_mixing = false;
  for (const RunRow& r : rows) any_mixing = any_mixing || r.has_mixing;
  if (any_mixing) out << ",mixing_time";
  out << "\n";
  for (const RunRow& r : rows) {
    out << r.group << "," << r.replicate << "," << r.scheme << "," << r.seed << ","
        << cfg.attempts << "," << g17(r.total_time);
    if (any_mixing) out << "," << (r.has_mixing ? g17(r.mixing_time) : "");
    out << "\n";
  }
  files.push_back((fs::path(cfg.out_dir) / "results.csv").string());
}

// gain experiments (scaling_alpha, scaling_n): per replicate one uniform and
// one importance run on the same generated data; gain = T_imp / T_unif
// (importance has the smaller envelope, hence simulates more process time
// for the same number of bouncing attempts).
std::vector<std::string> run_gain_experiment(const ExperimentConfig& cfg) {
  const bool by_alpha = cfg.kind == ExperimentKind::scaling_alpha;
  const std::size_t n_groups = by_alpha ? cfg.alpha_grid.size() : cfg.n_grid.size();
  const int n_tasks = static_cast<int>(n_groups) * cfg.replicates;

  std::vector<RunRow> unif_rows(static_cast<std::size_t>(n_tasks));
  std::vector<RunRow> imp_rows(static_cast<std::size_t>(n_tasks));

  parallel_for(n_tasks, cfg.jobs, [&](int task) {
    const int g = task / cfg.replicates;
    const int rep = task % cfg.replicates;
    SynthSpec spec = synth_from_config(cfg);
    if (by_alpha) {
      spec.alpha = cfg.alpha_grid[static_cast<std::size_t>(g)];
    } else {
      spec.n = cfg.n_grid[static_cast<std::size_t>(g)];
      spec.alpha = cfg.alpha;
    }
    const std::uint64_t data_seed = derive_seed(cfg.base_seed, 8ULL * task);
    const std::uint64_t unif_seed = derive_seed(cfg.base_seed, 8ULL * task + 1);
    const std::uint64_t imp_seed = derive_seed(cfg.base_seed, 8ULL * task + 2);
    const Dataset data = generate(spec, data_seed);

    SchemeConfig unif;
    unif.family = SchemeFamily::uniform;
    SchemeConfig imp;
    imp.family = SchemeFamily::importance;
    const std::string group = by_alpha ? g17(spec.alpha) : std::to_string(spec.n);
    unif_rows[static_cast<std::size_t>(task)] = {
        group, rep, "uniform", unif_seed,
        total_time_after(data, cfg.prior, unif, cfg.attempts, unif_seed), 0.0, false};
    imp_rows[static_cast<std::size_t>(task)] = {
        group, rep, "importance", imp_seed,
        total_time_after(data, cfg.prior, imp, cfg.attempts, imp_seed), 0.0, false};
  });

  std::vector<std::string> files;
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, files);

  std::vector<RunRow> all;
  all.reserve(static_cast<std::size_t>(2 * n_tasks));
  for (int t = 0; t < n_tasks; ++t) {
    all.push_back(unif_rows[static_cast<std::size_t>(t)]);
    all.push_back(imp_rows[static_cast<std::size_t>(t)]);
  }
  write_rows(cfg, by_alpha ? "alpha" : "n", all, files);

  auto out = open_out(fs::path(cfg.out_dir) / "summary.csv");
  out << (by_alpha ? "alpha" : "n") << ",replicates,mean_gain,sd_gain\n";
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::vector<double> t_unif, t_imp;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const int task = static_cast<int>(g) * cfg.replicates + rep;
      t_unif.push_back(unif_rows[static_cast<std::size_t>(task)].total_time);
      t_imp.push_back(imp_rows[static_cast<std::size_t>(task)].total_time);
    }
    const double mean_gain = efficiency_gain(t_imp, t_unif);
    double ss = 0.0;
    for (std::size_t r = 0; r < t_imp.size(); ++r) {
      const double d = t_imp[r] / t_unif[r] - mean_gain;
      ss += d * d;
    }
    const double sd =
        t_imp.size() > 1 ? std::sqrt(ss / static_cast<double>(t_imp.size() - 1)) : 0.0;
    out << unif_rows[g * static_cast<std::size_t>(cfg.replicates)].group << ","
        << cfg.replicates << "," << g17(mean_gain) << "," << g17(sd) << "\n";
  }
  files.push_back((fs::path(cfg.out_dir) / "summary.csv").string());
  return files;
}

// mixing-time ratio of importance+cv over importance as the response
// imbalance k decreases. The model carries an intercept: without one the
// response imbalance cannot spread the posterior and the ratio is flat.
std::vector<std::string> run_cv_imbalance(const ExperimentConfig& cfg) {
  const int n_tasks = static_cast<int>(cfg.k_grid.size()) * cfg.replicates;
  std::vector<RunRow> plain_rows(static_cast<std::size_t>(n_tasks));
  std::vector<RunRow> cv_rows(static_cast<std::size_t>(n_tasks));

  parallel_for(n_tasks, cfg.jobs, [&](int task) {
    const int g = task / cfg.replicates;
    const int rep = task % cfg.replicates;
    SynthSpec spec = synth_from_config(cfg);
    spec.response = SynthSpec::ResponseMode::fixed_ones;
    spec.fixed_k = cfg.k_grid[static_cast<std::size_t>(g)];
    const std::uint64_t data_seed = derive_seed(cfg.base_seed, 8ULL * task);
    const Dataset data = add_intercept(generate(spec, data_seed));
    const BoundConstants constants = compute_bound_constants(data);
    const CVReference ref = make_cv_reference(data, find_mode(data, cfg.prior));

    for (int variant = 0; variant < 2; ++variant) {
      SchemeConfig sc;
      sc.family = SchemeFamily::importance;
      sc.control_variate = variant == 1;
      const SubsamplingScheme scheme = SubsamplingScheme::build(
          data, constants, sc, sc.control_variate ? std::optional<CVReference>(ref)
                                                  : std::nullopt);
      RunConfig rc;
      rc.n_attempts = cfg.attempts;
      rc.seed = derive_seed(cfg.base_seed, 8ULL * task + 1 + variant);
      const RunResult result = run(data, cfg.prior, scheme, rc, zero_state(data.p()));
      // discard the first tenth of the trajectory as burn-in
      const double t_from = 0.1 * result.skeleton.final_state.t;
      const MixingReport report = mixing_report(result.skeleton, t_from);
      RunRow row{std::to_string(spec.fixed_k), rep,
                 variant == 1 ? "importance,cv" : "importance", rc.seed,
                 result.skeleton.total_time(), report.mixing_time, true};
      (variant == 1 ? cv_rows : plain_rows)[static_cast<std::size_t>(task)] = row;
    }
  });

  std::vector<std::string> files;
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, files);
  std::vector<RunRow> all;
  for (int t = 0; t < n_tasks; ++t) {
    all.push_back(plain_rows[static_cast<std::size_t>(t)]);
    all.push_back(cv_rows[static_cast<std::size_t>(t)]);
  }
  write_rows(cfg, "k", all, files);

  auto out = open_out(fs::path(cfg.out_dir) / "summary.csv");
  out << "k,replicates,median_ratio\n";
  for (std::size_t g = 0; g < cfg.k_grid.size(); ++g) {
    std::vector<double> ratios;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const int task = static_cast<int>(g) * cfg.replicates + rep;
      ratios.push_back(cv_rows[static_cast<std::size_t>(task)].mixing_time /
                       plain_rows[static_cast<std::size_t>(task)].mixing_time);
    }
    out << cfg.k_grid[g] << "," << cfg.replicates << "," << g17(median_of(ratios))
        << "\n";
  }
  files.push_back((fs::path(cfg.out_dir) / "summary.csv").string());
  return files;
}

// importance sub-sampling with and without adaptive preconditioning on the
// sparse high-dimensional instance; per-dimension ACF and IACT tables. The
// columns carry a geometric scale ramp of width scale_span so the posterior
// scales differ across dimensions (an iid instance at this size is nearly
// homogeneous and preconditioning has nothing to equalize).
std::vector<std::string> run_highdim(const ExperimentConfig& cfg) {
  const int n_tasks = 2 * cfg.replicates;  // variant-major: off, then precond
  std::vector<RunRow> rows(static_cast<std::size_t>(n_tasks));
  std::vector<std::vector<double>> iacts(static_cast<std::size_t>(n_tasks));
  std::vector<std::vector<std::vector<double>>> acfs(static_cast<std::size_t>(n_tasks));
  constexpr int kAcfLags = 40;

  SynthSpec spec = synth_from_config(cfg);
  if (cfg.xi_true_mode == "normal")
    spec.xi_true = normal_xi_true(cfg.p, cfg.base_seed);
  std::vector<double> ramp(static_cast<std::size_t>(cfg.p), 1.0);
  if (cfg.scale_span > 1.0) {
    for (int i = 0; i < cfg.p; ++i)
      ramp[static_cast<std::size_t>(i)] =
          std::pow(cfg.scale_span, i / static_cast<double>(cfg.p - 1) - 0.5);
  }

  parallel_for(n_tasks, cfg.jobs, [&](int task) {
    const int variant = task / cfg.replicates;
    const int rep = task % cfg.replicates;
    const std::uint64_t data_seed = derive_seed(cfg.base_seed, 16ULL * rep);
    const Dataset data = scale_columns(generate(spec, data_seed), ramp);
    const BoundConstants constants = compute_bound_constants(data);
    const SubsamplingScheme scheme =
        SubsamplingScheme::build(data, constants, cfg.scheme);

    RunConfig rc;
    rc.n_attempts = cfg.attempts;
    rc.seed = derive_seed(cfg.base_seed, 16ULL * rep + 1 + variant);
    if (variant == 1) rc.precondition = cfg.precondition;
    const RunResult result = run(data, cfg.prior, scheme, rc, zero_state(data.p()));

    // estimation on the frozen phase; the plain run discards the same
    // fraction of its own trajectory
    const double frac = static_cast<double>(cfg.precondition.freeze_after) /
                        static_cast<double>(cfg.attempts);
    const double t_from = variant == 1 ? result.stats.freeze_time
                                       : frac * result.skeleton.final_state.t;
    const MixingReport report = mixing_report(result.skeleton, t_from);

    const auto samples = discretize(result.skeleton, report.delta_t, t_from);
    auto& acf_rows = acfs[static_cast<std::size_t>(task)];
    acf_rows.reserve(static_cast<std::size_t>(data.p()));
    for (int i = 0; i < data.p(); ++i)
      acf_rows.push_back(autocorrelation(samples[static_cast<std::size_t>(i)], kAcfLags));

    iacts[static_cast<std::size_t>(task)] = report.iact_per_dim;
    rows[static_cast<std::size_t>(task)] =
        RunRow{variant == 1 ? "precond" : "off", rep, "importance", rc.seed,
               result.skeleton.total_time(), report.mixing_time, true};
  });

  std::vector<std::string> files;
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, files);
  write_rows(cfg, "variant", rows, files);

  {
    auto out = open_out(fs::path(cfg.out_dir) / "iact.csv");
    out << "variant,replicate,dim,iact\n";
    for (int t = 0; t < n_tasks; ++t) {
      for (std::size_t i = 0; i < iacts[static_cast<std::size_t>(t)].size(); ++i) {
        out << rows[static_cast<std::size_t>(t)].group << ","
            << rows[static_cast<std::size_t>(t)].replicate << "," << i << ","
            << g17(iacts[static_cast<std::size_t>(t)][i]) << "\n";
      }
    }
    files.push_back((fs::path(cfg.out_dir) / "iact.csv").string());
  }
  {
    auto out = open_out(fs::path(cfg.out_dir) / "acf.csv");
    out << "variant,replicate,dim,lag,acf\n";
    for (int t = 0; t < n_tasks; ++t) {
      const auto& acf_rows = acfs[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < acf_rows.size(); ++i) {
        for (std::size_t lag = 0; lag < acf_rows[i].size(); ++lag) {
          out << rows[static_cast<std::size_t>(t)].group << ","
              << rows[static_cast<std::size_t>(t)].replicate << "," << i << "," << lag
              << "," << g17(acf_rows[i][lag]) << "\n";
        }
      }
    }
    files.push_back((fs::path(cfg.out_dir) / "acf.csv").string());
  }
  {
    auto out = open_out(fs::path(cfg.out_dir) / "summary.csv");
    out << "variant,replicate,max_iact\n";
    for (int t = 0; t < n_tasks; ++t) {
      out << rows[static_cast<std::size_t>(t)].group << ","
          << rows[static_cast<std::size_t>(t)].replicate << ","
          << g17(rows[static_cast<std::size_t>(t)].mixing_time) << "\n";
    }
    files.push_back((fs::path(cfg.out_dir) / "summary.csv").string());
  }
  return files;
}

std::vector<std::string> run_single_kind(const ExperimentConfig& cfg) {
  Dataset data = [&] {
    if (!cfg.data_csv.empty()) {
      CsvOptions opts;
      opts.response_column = cfg.response_column;
      return load_csv(cfg.data_csv, opts);
    }
    SynthSpec spec = synth_from_config(cfg);
    return generate(spec, derive_seed(cfg.base_seed, 0));
  }();
  RunConfig rc;
  rc.n_attempts = cfg.attempts;
  rc.seed = derive_seed(cfg.base_seed, 1);
  rc.precondition = cfg.precondition;
  rc.record_mode = cfg.record_mode;
  SingleRunOutput out = run_single(data, cfg.prior, cfg.scheme, rc, cfg.out_dir);
  return out.files;
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.normalize();
  log_info(std::string("experiment ") + experiment_kind_name(cfg.kind) + " -> " +
           cfg.out_dir);
  switch (cfg.kind) {
    case ExperimentKind::scaling_alpha:
    case ExperimentKind::scaling_n:
      return run_gain_experiment(cfg);
    case ExperimentKind::cv_imbalance:
      return run_cv_imbalance(cfg);
    case ExperimentKind::highdim:
      return run_highdim(cfg);
    case ExperimentKind::single_run:
      return run_single_kind(cfg);
  }
  throw ConfigError("experiment: unhandled kind");
}

}  // namespace zz
