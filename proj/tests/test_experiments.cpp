#include <doctest.h>

#include <cmath>

#include "zz/experiments.hpp"
#include "zz/util.hpp"

#include "support.hpp"

using namespace zz;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("scheme strings round-trip") {
  const char* cases[] = {"uniform",     "importance",      "stratified",
                         "uniform,cv",  "importance,cv",   "stratified,iw",
                         "uniform,m=5", "importance,cv,m=3", "stratified,iw,m=32"};
  for (const char* text : cases) {
    const SchemeConfig cfg = parse_scheme(text);
    CHECK(scheme_to_string(cfg) == text);
  }
  CHECK(parse_scheme("importance,m=4").minibatch == 4);
  CHECK(parse_scheme("stratified,iw").family == SchemeFamily::stratified_importance);
}

TEST_CASE("scheme parsing rejects bad input") {
  CHECK_THROWS_AS(parse_scheme("nearest"), ConfigError);
  CHECK_THROWS_AS(parse_scheme("cv,m=2"), ConfigError);          // missing family
  CHECK_THROWS_AS(parse_scheme("stratified,cv"), ConfigError);   // undefined combo
  CHECK_THROWS_AS(parse_scheme("uniform,iw"), ConfigError);      // iw needs stratified
  CHECK_THROWS_AS(parse_scheme("uniform,m=0"), ConfigError);
  CHECK_THROWS_AS(parse_scheme("uniform,m=x"), ConfigError);
}

TEST_CASE("prior strings round-trip") {
  const char* cases[] = {"gaussian:1", "gaussian:1e+10", "cauchy:2.5", "laplace:0.5",
                         "gdp:1.2,0.8"};
  for (const char* text : cases) {
    const Prior prior = parse_prior(text);
    const Prior again = parse_prior(prior_to_string(prior));
    CHECK(again.kind == prior.kind);
    CHECK(again.variance == prior.variance);
    CHECK(again.scale == prior.scale);
    CHECK(again.shape == prior.shape);
  }
  CHECK_THROWS_AS(parse_prior("flat:1"), ConfigError);
  CHECK_THROWS_AS(parse_prior("gaussian:abc"), ConfigError);
  CHECK_THROWS_AS(parse_prior("gdp:1.0"), ConfigError);  // needs shape,scale
}

TEST_CASE("precondition strings round-trip") {
  CHECK_FALSE(parse_precondition("off").adaptive);
  const PreconditionConfig cfg = parse_precondition("adaptive:100,5000");
  CHECK(cfg.adaptive);
  CHECK(cfg.update_every == 100);
  CHECK(cfg.freeze_after == 5000);
  CHECK(precondition_to_string(cfg) == "adaptive:100,5000");
  CHECK_THROWS_AS(parse_precondition("adaptive:100"), ConfigError);
  CHECK_THROWS_AS(parse_precondition("adaptive:0,10"), ConfigError);
  CHECK_THROWS_AS(parse_precondition("sometimes"), ConfigError);
}

TEST_CASE("experiment config JSON round-trip") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::cv_imbalance;
  cfg.base_seed = 99;
  cfg.replicates = 4;
  cfg.attempts = 12345;
  cfg.jobs = 3;
  cfg.out_dir = "somewhere";
  cfg.k_grid = {100, 10};
  cfg.prior = Prior::laplace(0.7);
  cfg.scheme = parse_scheme("importance,cv");
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  // a manifest wraps the config under a "config" key
  const std::string manifest = "{\"version\":\"x\",\"config\":" + cfg.to_json() + "}";
  CHECK(ExperimentConfig::from_json(manifest).to_json() == cfg.to_json());

  CHECK_THROWS_AS(ExperimentConfig::from_json("not json"), ConfigError);
}

TEST_CASE("normalize fills kind defaults and validates") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::scaling_alpha;
  cfg.replicates = 0;
  cfg.attempts = 0;
  cfg.normalize();
  CHECK(cfg.n == 500);
  CHECK(cfg.p == 5);
  CHECK(cfg.alpha_grid == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(cfg.replicates == 10);

  ExperimentConfig bad;
  bad.jobs = 0;
  CHECK_THROWS_AS(bad.normalize(), ConfigError);
}

TEST_CASE("find_mode reaches a stationary point") {
  SynthSpec spec;
  spec.n = 200;
  spec.p = 4;
  spec.alpha = 0.8;
  const Dataset data = generate(spec, 31);
  // a reference point, not an exact optimum: the non-Gaussian priors use a
  // curvature surrogate and converge linearly near the mode
  for (const Prior& prior : {Prior::gaussian(1.0), Prior::cauchy(2.5)}) {
    const std::vector<double> mode = find_mode(data, prior);
    for (int i = 0; i < data.p(); ++i) {
      const double g = likelihood_grad_full(data, i, mode) +
                       prior_grad(prior, mode[static_cast<std::size_t>(i)]);
      CHECK(std::fabs(g) < 1e-5);
    }
  }
}

TEST_CASE("cancer surrogate and total_time helper compose") {
  const Dataset data = cancer_surrogate(7);
  SchemeConfig unif;
  unif.family = SchemeFamily::uniform;
  SchemeConfig imp;
  imp.family = SchemeFamily::importance;
  const double t_unif = total_time_after(data, Prior::gaussian(1.0), unif, 2000, 5);
  const double t_imp = total_time_after(data, Prior::gaussian(1.0), imp, 2000, 5);
  // the importance envelope is strictly smaller, so more time is simulated
  CHECK(t_imp > t_unif);
}

TEST_SUITE_END();
