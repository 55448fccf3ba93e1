#pragma once

#include <cstdint>
#include <vector>

#include "zz/dataset.hpp"
#include "zz/events.hpp"
#include "zz/moments.hpp"
#include "zz/prior.hpp"
#include "zz/state.hpp"
#include "zz/subsample.hpp"

namespace zz {

enum class RecordMode : std::uint8_t { full_state, flips_only };

struct PreconditionConfig {
  bool adaptive = false;
  std::uint64_t update_every = 100;  // accepted events between speed updates
  std::uint64_t freeze_after = 0;    // attempts; speeds are frozen afterwards
};

struct RunConfig {
  std::uint64_t n_attempts = 0;
  std::uint64_t seed = 0;
  PreconditionConfig precondition;
  RecordMode record_mode = RecordMode::flips_only;
};

struct SkeletonEvent {
  double t;
  int dim;          // proposed dimension
  ClockKind kind;   // which clock won
  bool accepted;    // whether theta_dim was flipped
};

struct AlphaUpdate {
  std::size_t after_event;  // index into Skeleton::events
  double t;
  std::vector<double> alpha;
};

// Event record of the piecewise-linear trajectory. The full path is exactly
// reconstructible from the initial state by replaying flips and linear drift
// xi(t) = xi_k + theta_k*alpha_k*(t - t_k). full_state mode records every
// bouncing attempt plus position snapshots; flips_only records accepted
// flips only (sufficient for replay, the velocity is constant in between).
struct Skeleton {
  ZigZagState initial;
  std::vector<SkeletonEvent> events;
  std::vector<AlphaUpdate> alpha_updates;
  std::vector<std::vector<double>> positions;  // full_state only, per event
  ZigZagState final_state;
  RecordMode mode = RecordMode::flips_only;

  double total_time() const { return final_state.t - initial.t; }
};

struct RunStats {
  std::uint64_t attempts = 0;
  std::uint64_t likelihood_proposals = 0;
  std::uint64_t prior_proposals = 0;
  std::uint64_t flips = 0;
  std::uint64_t speed_updates = 0;
  double min_accept_ratio = 1.0;  // over thinned proposals
  double max_accept_ratio = 0.0;
  double freeze_time = 0.0;  // process time when speeds were frozen (0 if never adaptive)
};

struct RunResult {
  Skeleton skeleton;
  RunStats stats;
};

// Direction flip F_i: negates component i. Involution; flips for distinct
// dimensions commute.
void flip(std::vector<double>& theta, int i);

// New speed vector from trajectory moments: sd_i = sqrt(m2/T - (m1/T)^2)
// componentwise, floored at 1e-8, then normalized so the speeds sum to p.
// Duration 0 is a no-op (returns `current`).
std::vector<double> update_preconditioner(const TrajectoryMoments& moments,
                                          std::span<const double> current);

// The generalized zig-zag loop: per attempt, draws the p prior clocks and the
// p likelihood envelope clocks, advances along the minimum, thins the winner
// (the Gaussian prior clock is exact and flips unconditionally), and records
// the event. Adaptive preconditioning updates the speeds every
// `update_every` accepted events until `freeze_after` attempts have run.
// Throws BoundViolation if any accept ratio exceeds 1 + 1e-9.
RunResult run(const Dataset& data, const Prior& prior, const SubsamplingScheme& scheme,
              const RunConfig& config, ZigZagState init);

// Invokes fn(t0, t1, xi_at_t0, velocity) for every linear segment, in order.
// Zero-length segments are skipped. `xi_at_t0` and `velocity` are spans valid
// only during the call.
template <typename F>
void replay(const Skeleton& skeleton, F&& fn);

namespace detail {
void replay_impl(const Skeleton& skeleton,
                 void (*fn)(void*, double, double, std::span<const double>,
                            std::span<const double>),
                 void* ctx);
}

template <typename F>
void replay(const Skeleton& skeleton, F&& fn) {
  auto thunk = [](void* ctx, double t0, double t1, std::span<const double> xi,
                  std::span<const double> v) {
    (*static_cast<F*>(ctx))(t0, t1, xi, v);
  };
  detail::replay_impl(skeleton, thunk, &fn);
}

}  // namespace zz
