#include <doctest.h>

#include <cmath>

#include "zz/data.hpp"
#include "zz/diagnostics.hpp"
#include "zz/experiments.hpp"
#include "zz/zigzag.hpp"

#include "support.hpp"

using namespace zz;

TEST_SUITE_BEGIN("zigzag");

TEST_CASE("flip is an involution and flips commute") {
  std::vector<double> theta{1.0, 1.0, -1.0};
  flip(theta, 0);
  CHECK(theta == std::vector<double>{-1.0, 1.0, -1.0});
  flip(theta, 0);
  CHECK(theta == std::vector<double>{1.0, 1.0, -1.0});

  std::vector<double> a{1.0, 1.0}, b{1.0, 1.0};
  flip(a, 0);
  flip(a, 1);
  flip(b, 1);
  flip(b, 0);
  CHECK(a == b);
}

TEST_CASE("preconditioner update from moments") {
  // sd = (1, 3) over duration 2: means 0, variances 1 and 9
  TrajectoryMoments m(2);
  m.duration = 2.0;
  m.m1 = {0.0, 0.0};
  m.m2 = {2.0, 18.0};
  const std::vector<double> alpha = update_preconditioner(m, std::vector<double>{1.0, 1.0});
  CHECK(alpha[0] == doctest::Approx(0.5));
  CHECK(alpha[1] == doctest::Approx(1.5));

  // equal sds normalize to all ones
  m.m2 = {8.0, 8.0};
  const std::vector<double> equal = update_preconditioner(m, std::vector<double>{1.0, 1.0});
  CHECK(equal[0] == doctest::Approx(1.0));
  CHECK(equal[1] == doctest::Approx(1.0));

  // degenerate dimension gets the floor, not zero
  m.m2 = {0.0, 18.0};
  const std::vector<double> floored = update_preconditioner(m, std::vector<double>{1.0, 1.0});
  CHECK(floored[0] > 0.0);
  CHECK(floored[0] + floored[1] == doctest::Approx(2.0));

  // zero elapsed time is a no-op
  TrajectoryMoments empty(2);
  const std::vector<double> kept =
      update_preconditioner(empty, std::vector<double>{0.25, 1.75});
  CHECK(kept == std::vector<double>{0.25, 1.75});
}

static Dataset flat_likelihood(int n) {
  // one all-zero column: the likelihood contributes nothing
  return Dataset::from_columns(n, 1, {{}}, std::vector<int>(static_cast<std::size_t>(n), 0));
}

TEST_CASE("zero attempts yields only the initial snapshot") {
  const Dataset data = flat_likelihood(3);
  const BoundConstants bc = compute_bound_constants(data);
  SchemeConfig sc;
  const SubsamplingScheme scheme = SubsamplingScheme::build(data, bc, sc);
  RunConfig rc;
  rc.n_attempts = 0;
  rc.seed = 1;
  const RunResult out =
      run(data, Prior::gaussian(1.0), scheme, rc, ZigZagState::make({0.5}, {1.0}));
  CHECK(out.skeleton.events.empty());
  CHECK(out.skeleton.total_time() == 0.0);
  CHECK(out.skeleton.initial.xi[0] == 0.5);
  CHECK(out.skeleton.final_state.xi[0] == 0.5);
}

TEST_CASE("flat likelihood targets the prior") {
  // all events are prior flips; the trajectory variance approaches the
  // quadrature value of the N(0,1) posterior
  const Dataset data = flat_likelihood(5);
  const BoundConstants bc = compute_bound_constants(data);
  SchemeConfig sc;
  const SubsamplingScheme scheme = SubsamplingScheme::build(data, bc, sc);
  RunConfig rc;
  rc.n_attempts = 100000;
  rc.seed = 42;
  const RunResult out =
      run(data, Prior::gaussian(1.0), scheme, rc, ZigZagState::make({0.0}, {1.0}));
  for (const SkeletonEvent& e : out.skeleton.events)
    CHECK(e.kind == ClockKind::prior);

  const zztest::QuadratureResult oracle =
      zztest::grid_posterior(data, Prior::gaussian(1.0), -8.0, 8.0, 4001);
  CHECK(oracle.variance[0] == doctest::Approx(1.0).epsilon(1e-4));

  const TrajectoryMoments m = integrate_moments(out.skeleton);
  CHECK(m.variance()[0] == doctest::Approx(oracle.variance[0]).epsilon(0.05));
}

TEST_CASE("deterministic flow between events") {
  // Skeleton with no flips: xi(t) - xi(0) = theta * t exactly.
  Skeleton skel;
  skel.initial = ZigZagState::make({1.0, -2.0}, {1.0, -1.0});
  skel.final_state = skel.initial;
  skel.final_state.t = 3.0;
  for (std::size_t i = 0; i < 2; ++i)
    skel.final_state.xi[i] += skel.initial.theta[i] * 3.0;
  const auto samples = discretize(skel, 1.5);
  CHECK(samples[0] == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(samples[1] == std::vector<double>{-2.0, -3.5, -5.0});
}

TEST_CASE("identical seed and config give a bit-identical skeleton") {
  auto [data, xi0] = zztest::random_instance(5, 40, 3, 0.5);
  const BoundConstants bc = compute_bound_constants(data);
  SchemeConfig sc;
  sc.family = SchemeFamily::importance;
  const SubsamplingScheme scheme = SubsamplingScheme::build(data, bc, sc);
  RunConfig rc;
  rc.n_attempts = 5000;
  rc.seed = 99;
  rc.record_mode = RecordMode::full_state;
  const ZigZagState init = ZigZagState::make({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  const RunResult a = run(data, Prior::gaussian(1.0), scheme, rc, init);
  const RunResult b = run(data, Prior::gaussian(1.0), scheme, rc, init);
  REQUIRE(a.skeleton.events.size() == b.skeleton.events.size());
  for (std::size_t k = 0; k < a.skeleton.events.size(); ++k) {
    CHECK(a.skeleton.events[k].t == b.skeleton.events[k].t);
    CHECK(a.skeleton.events[k].dim == b.skeleton.events[k].dim);
    CHECK(a.skeleton.events[k].accepted == b.skeleton.events[k].accepted);
  }
  CHECK(a.skeleton.final_state.xi == b.skeleton.final_state.xi);
  CHECK(a.skeleton.final_state.t == b.skeleton.final_state.t);
}

TEST_CASE("full-state positions agree with replay") {
  auto [data, xi0] = zztest::random_instance(8, 25, 2, 0.7);
  const BoundConstants bc = compute_bound_constants(data);
  SchemeConfig sc;
  const SubsamplingScheme scheme = SubsamplingScheme::build(data, bc, sc);
  RunConfig rc;
  rc.n_attempts = 2000;
  rc.seed = 7;
  rc.record_mode = RecordMode::full_state;
  const RunResult out = run(data, Prior::gaussian(1.0), scheme, rc,
                            ZigZagState::make({0.0, 0.0}, {1.0, -1.0}));
  const Skeleton& skel = out.skeleton;
  REQUIRE(skel.positions.size() == skel.events.size());

  std::size_t next = 0;
  std::vector<double> current = skel.initial.xi;
  replay(skel, [&](double t0, double t1, std::span<const double> xi,
                   std::span<const double> v) {
    (void)t0;
    // segment ends at one or more recorded events; check each position
    while (next < skel.events.size() && skel.events[next].t <= t1) {
      for (std::size_t i = 0; i < current.size(); ++i) {
        const double pos = xi[i] + v[i] * (skel.events[next].t - t0);
        CHECK(pos == doctest::Approx(skel.positions[next][i]).epsilon(1e-9));
      }
      ++next;
    }
  });
  CHECK(next == skel.events.size());
  // all accept ratios stayed in [0, 1]
  CHECK(out.stats.max_accept_ratio <= 1.0);
  CHECK(out.stats.min_accept_ratio >= 0.0);
}

TEST_CASE("adaptive speeds stay normalized and freeze") {
  auto [data, xi0] = zztest::random_instance(12, 30, 2, 0.8);
  const BoundConstants bc = compute_bound_constants(data);
  SchemeConfig sc;
  sc.family = SchemeFamily::importance;
  const SubsamplingScheme scheme = SubsamplingScheme::build(data, bc, sc);
  RunConfig rc;
  rc.n_attempts = 20000;
  rc.seed = 21;
  rc.precondition = {true, 50, 10000};
  const RunResult out = run(data, Prior::gaussian(1.0), scheme, rc,
                            ZigZagState::make({0.0, 0.0}, {1.0, 1.0}));
  REQUIRE(out.stats.speed_updates > 0);
  CHECK(out.stats.freeze_time > 0.0);
  for (const AlphaUpdate& u : out.skeleton.alpha_updates) {
    double total = 0.0;
    for (double a : u.alpha) total += a;
    CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(u.t <= out.stats.freeze_time + 1e-12);
  }
  // final speeds are the last update's speeds
  CHECK(out.skeleton.final_state.alpha == out.skeleton.alpha_updates.back().alpha);

  // replay with speed updates lands on the recorded final position
  std::vector<double> xi = out.skeleton.initial.xi;
  replay(out.skeleton, [&](double t0, double t1, std::span<const double> xi_seg,
                           std::span<const double> v) {
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = xi_seg[i] + v[i] * (t1 - t0);
  });
  for (std::size_t i = 0; i < xi.size(); ++i)
    CHECK(xi[i] == doctest::Approx(out.skeleton.final_state.xi[i]).epsilon(1e-8));
}

TEST_CASE("every scheme targets the same posterior") {
  // reduced stationarity check: trajectory means and variances against a
  // dense 2-d quadrature oracle, within 3 batch-means standard errors
  SynthSpec spec;
  spec.n = 30;
  spec.p = 2;
  spec.alpha = 1.0;
  spec.xi_true = {0.8, -0.5};
  const Dataset data = generate(spec, 1234);
  const Prior prior = Prior::gaussian(1.0);
  const BoundConstants bc = compute_bound_constants(data);
  const zztest::QuadratureResult oracle =
      zztest::grid_posterior(data, prior, -5.0, 5.0, 400);
  const CVReference ref = make_cv_reference(data, find_mode(data, prior));

  struct Variant {
    const char* name;
    SchemeFamily family;
    bool cv;
    int m;
    bool precondition;
  };
  const Variant variants[] = {
      {"uniform", SchemeFamily::uniform, false, 1, false},
      {"importance", SchemeFamily::importance, false, 1, false},
      {"uniform,cv", SchemeFamily::uniform, true, 1, false},
      {"importance,cv", SchemeFamily::importance, true, 1, false},
      {"stratified", SchemeFamily::stratified, false, 5, false},
      {"uniform,m=5", SchemeFamily::uniform, false, 5, false},
      {"importance,precond", SchemeFamily::importance, false, 1, true},
  };

  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> ses;
  for (const Variant& v : variants) {
    CAPTURE(v.name);
    SchemeConfig cfg;
    cfg.family = v.family;
    cfg.minibatch = v.m;
    cfg.control_variate = v.cv;
    const bool needs_ref = v.cv || v.family == SchemeFamily::stratified;
    const SubsamplingScheme scheme = SubsamplingScheme::build(
        data, bc, cfg, needs_ref ? std::optional<CVReference>(ref) : std::nullopt);
    RunConfig rc;
    rc.n_attempts = 150000;
    rc.seed = 5000 + static_cast<std::uint64_t>(&v - variants);
    if (v.precondition) rc.precondition = {true, 100, 30000};
    const RunResult out =
        run(data, prior, scheme, rc, ZigZagState::make({0.0, 0.0}, {1.0, 1.0}));

    const double t_end = out.skeleton.final_state.t;
    const double t0 = v.precondition ? out.stats.freeze_time : 0.1 * t_end;
    const int k_batches = 20;
    const auto batches = batch_moments(out.skeleton, t0, k_batches);
    std::vector<double> mean(2), se_mean(2);
    for (int i = 0; i < 2; ++i) {
      std::vector<double> bm;
      for (const TrajectoryMoments& b : batches)
        bm.push_back(b.m1[static_cast<std::size_t>(i)] / b.duration);
      mean[static_cast<std::size_t>(i)] = zztest::mean_of(bm);
      se_mean[static_cast<std::size_t>(i)] =
          zztest::sd_of(bm) / std::sqrt(static_cast<double>(k_batches));
      CHECK(std::fabs(mean[static_cast<std::size_t>(i)] -
                      oracle.mean[static_cast<std::size_t>(i)]) <=
            3.0 * se_mean[static_cast<std::size_t>(i)]);

      std::vector<double> bv;
      for (const TrajectoryMoments& b : batches) {
        const double mu = b.m1[static_cast<std::size_t>(i)] / b.duration;
        bv.push_back(b.m2[static_cast<std::size_t>(i)] / b.duration - mu * mu);
      }
      const double var = zztest::mean_of(bv);
      const double se_var = zztest::sd_of(bv) / std::sqrt(static_cast<double>(k_batches));
      CHECK(std::fabs(var - oracle.variance[static_cast<std::size_t>(i)]) <=
            3.0 * se_var);
    }
    means.push_back(mean);
    ses.push_back(se_mean);
    CHECK(out.stats.max_accept_ratio <= 1.0);
  }

  // pairwise scheme equivalence on the posterior mean
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      for (int i = 0; i < 2; ++i) {
        const double se = std::sqrt(ses[a][static_cast<std::size_t>(i)] *
                                        ses[a][static_cast<std::size_t>(i)] +
                                    ses[b][static_cast<std::size_t>(i)] *
                                        ses[b][static_cast<std::size_t>(i)]);
        CHECK(std::fabs(means[a][static_cast<std::size_t>(i)] -
                        means[b][static_cast<std::size_t>(i)]) <= 3.0 * se);
      }
    }
  }
}

TEST_SUITE_END();
