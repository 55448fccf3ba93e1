#include "zz/zigzag.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "zz/rng.hpp"
#include "zz/util.hpp"

namespace zz {

static constexpr double kInf = std::numeric_limits<double>::infinity();

void flip(std::vector<double>& theta, int i) {
  theta[static_cast<std::size_t>(i)] = -theta[static_cast<std::size_t>(i)];
}

std::vector<double> update_preconditioner(const TrajectoryMoments& moments,
                                          std::span<const double> current) {
  if (!(moments.duration > 0.0)) return {current.begin(), current.end()};
  constexpr double kSdFloor = 1e-8;
  const std::size_t p = moments.m1.size();
  std::vector<double> sd(p);
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double mu = moments.m1[i] / moments.duration;
    const double var = moments.m2[i] / moments.duration - mu * mu;
    sd[i] = std::max(std::sqrt(std::max(var, 0.0)), kSdFloor);
    total += sd[i];
  }
  const double scale = static_cast<double>(p) / total;
  for (std::size_t i = 0; i < p; ++i) sd[i] *= scale;
  return sd;
}

static double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

RunResult run(const Dataset& data, const Prior& prior, const SubsamplingScheme& scheme,
              const RunConfig& config, ZigZagState init) {
  validate_state(init);
  const int p = init.dim();
  if (p != data.p()) throw std::invalid_argument("run: state dimension mismatch");
  const PreconditionConfig& pre = config.precondition;
  if (pre.adaptive) {
    if (pre.update_every < 1)
      throw std::invalid_argument("run: update_every must be at least 1");
    if (pre.freeze_after > config.n_attempts)
      throw std::invalid_argument("run: freeze_after exceeds n_attempts");
  }

  Rng rng(config.seed);
  ZigZagState state = std::move(init);
  const bool cv = scheme.uses_cv();
  const CVReference* ref = scheme.reference();

  Skeleton skel;
  skel.initial = state;
  skel.mode = config.record_mode;
  RunStats stats;
  stats.attempts = config.n_attempts;

  TrajectoryMoments moments(p);
  std::vector<double> velocity(static_cast<std::size_t>(p));
  std::vector<int> batch;
  std::uint64_t events_since_update = 0;
  bool frozen_marked = false;
  bool moments_settled = false;  // the first trigger only opens the window
  double alpha_norm = l2_norm(state.alpha);

  for (std::uint64_t attempt = 0; attempt < config.n_attempts; ++attempt) {
    // Fixed draw order per attempt: p prior exponentials, p likelihood
    // exponentials, then (for the thinned winner) batch draws and one
    // uniform. Scanning priors first and strictly improving on ties gives
    // the documented tie-break: prior before likelihood, then smallest
    // dimension.
    double best_tau = kInf;
    int best_dim = -1;
    ClockKind best_kind = ClockKind::prior;
    RateBound best_bound;

    for (int i = 0; i < p; ++i) {
      const double e = rng.exponential();
      const RateBound bound = prior_rate_params(prior, i, state);
      const double tau = first_arrival(bound, e);
      if (tau < best_tau) {
        best_tau = tau;
        best_dim = i;
        best_kind = ClockKind::prior;
        best_bound = bound;
      }
    }

    double dist = 0.0;
    if (cv) {
      double s = 0.0;
      for (int i = 0; i < p; ++i) {
        const double dx = state.xi[static_cast<std::size_t>(i)] -
                          ref->xi_star[static_cast<std::size_t>(i)];
        s += dx * dx;
      }
      dist = std::sqrt(s);
    }
    for (int i = 0; i < p; ++i) {
      const double e = rng.exponential();
      const RateBound bound = scheme.bound_for(i, state, dist, alpha_norm);
      const double tau = first_arrival(bound, e);
      if (tau < best_tau) {
        best_tau = tau;
        best_dim = i;
        best_kind = ClockKind::likelihood;
        best_bound = bound;
      }
    }

    if (std::isinf(best_tau))
      throw std::runtime_error("process frozen: total event rate is zero");

    for (int i = 0; i < p; ++i)
      velocity[static_cast<std::size_t>(i)] =
          state.theta[static_cast<std::size_t>(i)] * state.alpha[static_cast<std::size_t>(i)];
    accumulate_segment(moments, state.xi, velocity, best_tau);
    for (int i = 0; i < p; ++i)
      state.xi[static_cast<std::size_t>(i)] += velocity[static_cast<std::size_t>(i)] * best_tau;
    state.t += best_tau;

    const std::size_t d = static_cast<std::size_t>(best_dim);
    bool accepted = false;
    if (best_kind == ClockKind::prior && prior.exact_clock()) {
      // exact linear-rate clock: the arrival is a true event
      ++stats.prior_proposals;
      accepted = true;
    } else {
      double rate;
      if (best_kind == ClockKind::prior) {
        ++stats.prior_proposals;
        rate = std::max(0.0, state.theta[d] * state.alpha[d] *
                                 prior_grad(prior, state.xi[d]));
      } else {
        ++stats.likelihood_proposals;
        scheme.draw_batch(best_dim, rng, batch);
        const double est = scheme.estimate_grad(data, best_dim, state.xi, batch);
        rate = std::max(0.0, state.theta[d] * state.alpha[d] * est);
      }
      const double envelope = envelope_value(best_bound, best_tau);
      const double ratio = rate / envelope;
      if (!(ratio <= 1.0 + 1e-9))
        throw BoundViolation("bound violation: accept ratio " + std::to_string(ratio) +
                             " in dimension " + std::to_string(best_dim));
      if (ratio < stats.min_accept_ratio) stats.min_accept_ratio = ratio;
      if (ratio > stats.max_accept_ratio) stats.max_accept_ratio = ratio;
      accepted = rng.uniform_open() < ratio;
    }

    if (accepted) {
      flip(state.theta, best_dim);
      ++stats.flips;
      ++events_since_update;
    }

    if (config.record_mode == RecordMode::full_state) {
      skel.events.push_back({state.t, best_dim, best_kind, accepted});
      skel.positions.push_back(state.xi);
    } else if (accepted) {
      skel.events.push_back({state.t, best_dim, best_kind, true});
    }

    if (pre.adaptive && attempt + 1 <= pre.freeze_after &&
        events_since_update >= pre.update_every && moments.duration > 0.0) {
      if (!moments_settled) {
        // the opening stretch covers the move-in transient from the starting
        // point; drop it so the speed estimates reflect the stationary scales
        moments = TrajectoryMoments(p);
        moments_settled = true;
      } else {
        state.alpha = update_preconditioner(moments, state.alpha);
        alpha_norm = l2_norm(state.alpha);
        ++stats.speed_updates;
        skel.alpha_updates.push_back({skel.events.size() - 1, state.t, state.alpha});
      }
      events_since_update = 0;
    }
    if (pre.adaptive && !frozen_marked && attempt + 1 >= pre.freeze_after) {
      stats.freeze_time = state.t;
      frozen_marked = true;
    }
  }

  skel.final_state = state;
  return {std::move(skel), stats};
}

namespace detail {

void replay_impl(const Skeleton& skel,
                 void (*fn)(void*, double, double, std::span<const double>,
                            std::span<const double>),
                 void* ctx) {
  const std::size_t p = skel.initial.xi.size();
  std::vector<double> xi = skel.initial.xi;
  std::vector<double> theta = skel.initial.theta;
  std::vector<double> alpha = skel.initial.alpha;
  std::vector<double> velocity(p);
  double t = skel.initial.t;
  std::size_t next_alpha = 0;

  auto emit_until = [&](double t1) {
    if (t1 <= t) return;
    for (std::size_t i = 0; i < p; ++i) velocity[i] = theta[i] * alpha[i];
    fn(ctx, t, t1, xi, velocity);
    const double tau = t1 - t;
    for (std::size_t i = 0; i < p; ++i) xi[i] += velocity[i] * tau;
    t = t1;
  };

  for (std::size_t e = 0; e < skel.events.size(); ++e) {
    const SkeletonEvent& ev = skel.events[e];
    emit_until(ev.t);
    if (ev.accepted) theta[static_cast<std::size_t>(ev.dim)] = -theta[static_cast<std::size_t>(ev.dim)];
    while (next_alpha < skel.alpha_updates.size() &&
           skel.alpha_updates[next_alpha].after_event == e) {
      alpha = skel.alpha_updates[next_alpha].alpha;
      ++next_alpha;
    }
  }
  emit_until(skel.final_state.t);
}

}  // namespace detail

}  // namespace zz
