#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zz/dataset.hpp"
#include "zz/events.hpp"
#include "zz/model.hpp"
#include "zz/rng.hpp"
#include "zz/state.hpp"

namespace zz {

// stratified_importance combines the two variance-reduction routes: strata
// over the weighted term gradients with importance draws inside each stratum.
// Its envelope is c_bar, the same as plain importance sub-sampling.
enum class SchemeFamily { uniform, importance, stratified, stratified_importance };

const char* family_name(SchemeFamily family);

// Walker alias table: O(n) build, O(1) draw. Zero weights are never drawn.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);  // weights >= 0, sum > 0
  int draw(Rng& rng) const;
  int size() const { return static_cast<int>(prob_.size()); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

// Importance weights for one dimension, aligned with the dataset column
// support. `active` is false when every constant is zero, in which case the
// likelihood rate of that dimension is identically zero and no alias table
// exists.
struct WeightTable {
  std::vector<double> omega;
  std::optional<AliasTable> alias;
  bool active = false;
};

// omega_j = constants_j / sum(constants); zero constants get zero weight and
// are excluded from the alias draws.
WeightTable build_importance_weights(std::span<const double> constants);

// Reference point for control variates: position xi*, full gradients
// grad_star[i] = d_i U^bullet(xi*), and the per-term gradients over the
// sparse column support (grad_star[i] equals the sum of its term grads).
struct CVReference {
  std::vector<double> xi_star;
  std::vector<double> grad_star;
  std::vector<std::vector<double>> term_grads_star;
};

CVReference make_cv_reference(const Dataset& data, std::span<const double> xi_star);

// ---- Greedy stratification (per-dimension clustering of reference-point
// gradients). Scores follow the partition objective sum_k |S^k| diam(S^k).

// |group| * (max - min) for a sorted group of values.
double strata_score(std::span<const double> sorted_values);

// Score of splitting sorted_values after position k (1 <= k < size):
// strata_score(first k) + strata_score(rest).
double strata_split_score(std::span<const double> sorted_values, int k);

// m contiguous groups over the sorted values, produced by m-1 greedy splits.
// Each split picks the group and split point with the best improvement
// (ties: earliest group in left-to-right order, then smallest split index).
// Returns half-open [begin, end) ranges in left-to-right order.
std::vector<std::pair<int, int>> build_strata(std::span<const double> sorted_values,
                                              int m);

struct SchemeConfig {
  SchemeFamily family = SchemeFamily::uniform;
  int minibatch = 1;  // m; for the stratified family this is the strata count
  bool control_variate = false;
};

// One fully-built sub-sampling scheme: gradient estimator d^_i U^bullet, the
// batch distribution mu_i, and the per-dimension rate envelopes that dominate
// every realizable stochastic rate. Immutable after build(); draw_batch takes
// the caller's RNG stream so independent chains can share one scheme.
class SubsamplingScheme {
 public:
  // `ref` must be provided when control_variate is set (CV estimator and
  // Lipschitz envelopes) and for the stratified families (strata are built
  // from the reference-point gradients). Stratified + control variates is not
  // a defined combination and is rejected.
  static SubsamplingScheme build(const Dataset& data, const BoundConstants& constants,
                                 const SchemeConfig& config,
                                 std::optional<CVReference> ref = std::nullopt);

  const SchemeConfig& config() const { return cfg_; }
  int minibatch() const { return cfg_.minibatch; }
  SchemeFamily family() const { return cfg_.family; }
  bool uses_cv() const { return cfg_.control_variate; }
  const CVReference* reference() const { return ref_ ? &*ref_ : nullptr; }

  // False when the likelihood rate of dimension i is identically zero.
  bool active(int i) const { return active_[static_cast<std::size_t>(i)] != 0; }

  // Constant part of the envelope before speed scaling: n*c_max_i for the
  // uniform and stratified families, c_bar_i for importance and
  // stratified_importance (the C variants under control variates).
  double envelope_constant(int i) const {
    return envelope_k_[static_cast<std::size_t>(i)];
  }

  // Importance weight of observation j in dimension i (0 when unweighted or
  // outside the support).
  double omega(int i, int j, const Dataset& data) const;

  // Strata of dimension i as index lists over {0,...,n-1}, in stratum order.
  const std::vector<std::vector<int>>& strata(int i) const;

  // Batch B ~ mu_i: m iid uniform indices, m iid importance draws, or one
  // uniform draw per stratum (in stratum order).
  void draw_batch(int i, Rng& rng, std::vector<int>& batch) const;
  std::vector<int> draw_batch(int i, Rng& rng) const;

  // Unbiased estimator d^_i U^bullet(xi, B) for a batch drawn by draw_batch
  // for the same (scheme, i). Throws std::invalid_argument on a batch size
  // mismatch.
  double estimate_grad(const Dataset& data, int i, std::span<const double> xi,
                       std::span<const int> batch) const;

  // Envelope M_i(t) dominating {theta_i alpha_i d^_i U^bullet(xi + theta
  // alpha t, B)}^+ for every batch and t >= 0. `dist_to_ref` and `alpha_norm`
  // are ||xi - xi*||_2 and ||alpha||_2 (only read under control variates);
  // callers on the hot path precompute them once per attempt.
  RateBound bound_for(int i, const ZigZagState& state, double dist_to_ref,
                      double alpha_norm) const;
  RateBound bound_for(int i, const ZigZagState& state) const;  // computes both

 private:
  SubsamplingScheme() = default;

  SchemeConfig cfg_;
  int n_ = 0;
  int p_ = 0;
  std::optional<CVReference> ref_;
  std::vector<WeightTable> weights_;                    // importance only
  std::vector<std::vector<int>> support_;               // importance: column obs indices
  std::vector<std::vector<std::vector<int>>> strata_;   // stratified families
  std::vector<std::vector<AliasTable>> strata_alias_;   // stratified_importance
  std::vector<std::vector<double>> strata_cbar_;        // per-stratum sum of c_i^j
  std::vector<double> envelope_k_;
  std::vector<char> active_;
};

// Exhaustive-enumeration refreshment rate gamma_i(xi) = (E|d^_i U| - |d_i U|)/2
// for the scheme's batch distribution. Test oracle only: throws
// std::invalid_argument when the enumeration exceeds ~2e6 batches.
double refreshment_rate_oracle(const SubsamplingScheme& scheme, const Dataset& data,
                               int i, std::span<const double> xi, double theta_i);

}  // namespace zz
