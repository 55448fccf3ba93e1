#include "zz/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace zz {

const char* family_name(SchemeFamily family) {
  switch (family) {
    case SchemeFamily::uniform: return "uniform";
    case SchemeFamily::importance: return "importance";
    case SchemeFamily::stratified: return "stratified";
    case SchemeFamily::stratified_importance: return "stratified_importance";
  }
  return "?";
}

AliasTable::AliasTable(std::span<const double> weights) {
  const int k = static_cast<int>(weights.size());
  if (k == 0) throw std::invalid_argument("alias table: empty weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("alias table: negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("alias table: zero total weight");

  prob_.resize(static_cast<std::size_t>(k));
  alias_.assign(static_cast<std::size_t>(k), 0);
  std::vector<double> scaled(static_cast<std::size_t>(k));
  std::vector<int> small, large;
  small.reserve(static_cast<std::size_t>(k));
  large.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    scaled[static_cast<std::size_t>(i)] = weights[static_cast<std::size_t>(i)] * k / sum;
    (scaled[static_cast<std::size_t>(i)] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    large.pop_back();
    prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
    alias_[static_cast<std::size_t>(s)] = l;
    scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
    (scaled[static_cast<std::size_t>(l)] < 1.0 ? small : large).push_back(l);
  }
  for (int i : large) {
    prob_[static_cast<std::size_t>(i)] = 1.0;
    alias_[static_cast<std::size_t>(i)] = i;
  }
  for (int i : small) {  // float residue only
    prob_[static_cast<std::size_t>(i)] = 1.0;
    alias_[static_cast<std::size_t>(i)] = i;
  }
}

int AliasTable::draw(Rng& rng) const {
  const int cell = static_cast<int>(rng.below(static_cast<std::uint64_t>(prob_.size())));
  const double coin = rng.uniform();
  return coin < prob_[static_cast<std::size_t>(cell)] ? cell
                                                      : alias_[static_cast<std::size_t>(cell)];
}

WeightTable build_importance_weights(std::span<const double> constants) {
  WeightTable out;
  double sum = 0.0;
  for (double c : constants) {
    if (!(c >= 0.0)) throw std::invalid_argument("importance weights: negative constant");
    sum += c;
  }
  out.omega.resize(constants.size());
  if (!(sum > 0.0)) {
    out.active = false;  // inactive dimension: likelihood rate identically 0
    return out;
  }
  for (std::size_t i = 0; i < constants.size(); ++i) out.omega[i] = constants[i] / sum;
  out.alias.emplace(out.omega);
  out.active = true;
  return out;
}

CVReference make_cv_reference(const Dataset& data, std::span<const double> xi_star) {
  if (xi_star.size() != static_cast<std::size_t>(data.p()))
    throw std::invalid_argument("cv reference: dimension mismatch");
  CVReference ref;
  ref.xi_star.assign(xi_star.begin(), xi_star.end());
  ref.grad_star.assign(static_cast<std::size_t>(data.p()), 0.0);
  ref.term_grads_star.resize(static_cast<std::size_t>(data.p()));
  for (int i = 0; i < data.p(); ++i) {
    const auto& col = data.column(i);
    auto& grads = ref.term_grads_star[static_cast<std::size_t>(i)];
    grads.reserve(col.size());
    double total = 0.0;
    for (const SparseEntry& e : col) {
      const double z = dot_row(data, e.index, xi_star);
      const double g = e.value * (sigmoid(z) - static_cast<double>(data.response(e.index)));
      grads.push_back(g);
      total += g;
    }
    ref.grad_star[static_cast<std::size_t>(i)] = total;
  }
  return ref;
}

double strata_score(std::span<const double> sorted_values) {
  if (sorted_values.empty()) return 0.0;
  return static_cast<double>(sorted_values.size()) *
         (sorted_values.back() - sorted_values.front());
}

double strata_split_score(std::span<const double> sorted_values, int k) {
  const int r = static_cast<int>(sorted_values.size());
  if (k < 1 || k >= r) throw std::invalid_argument("split score: k out of range");
  return strata_score(sorted_values.subspan(0, static_cast<std::size_t>(k))) +
         strata_score(sorted_values.subspan(static_cast<std::size_t>(k)));
}

std::vector<std::pair<int, int>> build_strata(std::span<const double> sorted_values,
                                              int m) {
  const int n = static_cast<int>(sorted_values.size());
  if (n == 0) throw std::invalid_argument("strata: empty values");
  if (m < 1 || m > n) throw std::invalid_argument("strata: need 1 <= m <= n");
  for (int j = 0; j + 1 < n; ++j) {
    if (sorted_values[static_cast<std::size_t>(j)] > sorted_values[static_cast<std::size_t>(j) + 1])
      throw std::invalid_argument("strata: values not sorted");
  }

  std::vector<std::pair<int, int>> groups{{0, n}};
  groups.reserve(static_cast<std::size_t>(m));
  for (int split = 1; split < m; ++split) {
    int best_group = -1;
    int best_k = -1;
    double best_improvement = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto [begin, end] = groups[g];
      const int r = end - begin;
      if (r < 2) continue;
      const auto vals = sorted_values.subspan(static_cast<std::size_t>(begin),
                                              static_cast<std::size_t>(r));
      const double whole = strata_score(vals);
      for (int k = 1; k < r; ++k) {
        const double improvement = strata_split_score(vals, k) - whole;
        if (improvement < best_improvement) {
          best_improvement = improvement;
          best_group = static_cast<int>(g);
          best_k = k;
        }
      }
    }
    const auto [begin, end] = groups[static_cast<std::size_t>(best_group)];
    groups[static_cast<std::size_t>(best_group)] = {begin, begin + best_k};
    groups.insert(groups.begin() + best_group + 1, {begin + best_k, end});
  }
  return groups;
}

namespace {

// position of observation j in a sorted sparse column, -1 when absent
int support_pos(const std::vector<SparseEntry>& col, int j) {
  auto it = std::lower_bound(col.begin(), col.end(), j,
                             [](const SparseEntry& e, int key) { return e.index < key; });
  if (it != col.end() && it->index == j) return static_cast<int>(it - col.begin());
  return -1;
}

}  // namespace

SubsamplingScheme SubsamplingScheme::build(const Dataset& data,
                                           const BoundConstants& constants,
                                           const SchemeConfig& config,
                                           std::optional<CVReference> ref) {
  const bool stratified_family = config.family == SchemeFamily::stratified ||
                                 config.family == SchemeFamily::stratified_importance;
  if (config.minibatch < 1)
    throw std::invalid_argument("scheme: mini-batch size must be at least 1");
  if (config.control_variate && stratified_family)
    throw std::invalid_argument("scheme: stratified + control variates is not defined");
  const bool needs_ref = config.control_variate || stratified_family;
  if (needs_ref && !ref)
    throw std::invalid_argument("scheme: reference point required");
  if (ref && ref->xi_star.size() != static_cast<std::size_t>(data.p()))
    throw std::invalid_argument("scheme: reference dimension mismatch");
  if (config.family == SchemeFamily::stratified && config.minibatch > data.n())
    throw std::invalid_argument("scheme: more strata than observations");

  SubsamplingScheme s;
  s.cfg_ = config;
  s.n_ = data.n();
  s.p_ = data.p();
  s.ref_ = std::move(ref);

  const std::size_t p = static_cast<std::size_t>(data.p());
  const bool sum_envelope = config.family == SchemeFamily::importance ||
                            config.family == SchemeFamily::stratified_importance;
  s.active_.resize(p);
  s.envelope_k_.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    s.active_[i] = constants.c_bar[i] > 0.0 ? 1 : 0;
    if (config.control_variate) {
      s.envelope_k_[i] = sum_envelope
                             ? constants.C_bar[i]
                             : static_cast<double>(data.n()) * constants.C_max[i];
    } else {
      s.envelope_k_[i] = sum_envelope
                             ? constants.c_bar[i]
                             : static_cast<double>(data.n()) * constants.c_max[i];
    }
  }

  if (config.family == SchemeFamily::importance) {
    s.weights_.reserve(p);
    s.support_.resize(p);
    const auto& tables = config.control_variate ? constants.C : constants.c;
    for (std::size_t i = 0; i < p; ++i) {
      s.weights_.push_back(build_importance_weights(tables[i]));
      const auto& col = data.column(static_cast<int>(i));
      auto& sup = s.support_[i];
      sup.reserve(col.size());
      for (const SparseEntry& e : col) sup.push_back(e.index);
    }
  }

  if (config.family == SchemeFamily::stratified) {
    const CVReference& r = *s.ref_;
    s.strata_.resize(p);
    std::vector<std::pair<double, int>> values;
    for (std::size_t i = 0; i < p; ++i) {
      values.assign(static_cast<std::size_t>(data.n()), {0.0, 0});
      for (int j = 0; j < data.n(); ++j) values[static_cast<std::size_t>(j)].second = j;
      const auto& col = data.column(static_cast<int>(i));
      for (std::size_t k = 0; k < col.size(); ++k)
        values[static_cast<std::size_t>(col[k].index)].first = r.term_grads_star[i][k];
      std::sort(values.begin(), values.end());
      std::vector<double> sorted(values.size());
      for (std::size_t k = 0; k < values.size(); ++k) sorted[k] = values[k].first;
      const auto ranges = build_strata(sorted, config.minibatch);
      auto& strata = s.strata_[i];
      strata.reserve(ranges.size());
      for (const auto& [begin, end] : ranges) {
        std::vector<int> members;
        members.reserve(static_cast<std::size_t>(end - begin));
        for (int k = begin; k < end; ++k)
          members.push_back(values[static_cast<std::size_t>(k)].second);
        std::sort(members.begin(), members.end());
        strata.push_back(std::move(members));
      }
    }
  }

  if (config.family == SchemeFamily::stratified_importance) {
    // strata over the support only (zero-weight terms cannot be drawn and
    // contribute exactly zero), clustered by the weighted term gradients
    // g_j / omega_j whose sums the estimator takes
    const CVReference& r = *s.ref_;
    s.strata_.resize(p);
    s.strata_alias_.resize(p);
    s.strata_cbar_.resize(p);
    std::vector<std::pair<double, int>> values;
    for (std::size_t i = 0; i < p; ++i) {
      const auto& col = data.column(static_cast<int>(i));
      if (col.empty()) continue;  // inactive dimension
      if (config.minibatch > static_cast<int>(col.size()))
        throw std::invalid_argument(
            "scheme: more strata than support entries in dimension " +
            std::to_string(i));
      values.clear();
      for (std::size_t k = 0; k < col.size(); ++k) {
        const double c = constants.c[i][k];
        values.push_back({r.term_grads_star[i][k] / c, col[k].index});
      }
      std::sort(values.begin(), values.end());
      std::vector<double> sorted(values.size());
      for (std::size_t k = 0; k < values.size(); ++k) sorted[k] = values[k].first;
      const auto ranges = build_strata(sorted, config.minibatch);
      auto& strata = s.strata_[i];
      auto& alias = s.strata_alias_[i];
      auto& cbar = s.strata_cbar_[i];
      for (const auto& [begin, end] : ranges) {
        std::vector<int> members;
        std::vector<double> weights;
        members.reserve(static_cast<std::size_t>(end - begin));
        for (int k = begin; k < end; ++k)
          members.push_back(values[static_cast<std::size_t>(k)].second);
        std::sort(members.begin(), members.end());
        double total = 0.0;
        for (int j : members) {
          const int pos = support_pos(col, j);
          weights.push_back(constants.c[i][static_cast<std::size_t>(pos)]);
          total += weights.back();
        }
        strata.push_back(std::move(members));
        alias.emplace_back(weights);
        cbar.push_back(total);
      }
    }
  }
  return s;
}

double SubsamplingScheme::omega(int i, int j, const Dataset& data) const {
  if (cfg_.family != SchemeFamily::importance) return 0.0;
  const auto& wt = weights_[static_cast<std::size_t>(i)];
  if (!wt.active) return 0.0;
  const int pos = support_pos(data.column(i), j);
  return pos < 0 ? 0.0 : wt.omega[static_cast<std::size_t>(pos)];
}

const std::vector<std::vector<int>>& SubsamplingScheme::strata(int i) const {
  if (cfg_.family != SchemeFamily::stratified &&
      cfg_.family != SchemeFamily::stratified_importance)
    throw std::invalid_argument("scheme: no strata for this family");
  return strata_[static_cast<std::size_t>(i)];
}

void SubsamplingScheme::draw_batch(int i, Rng& rng, std::vector<int>& batch) const {
  batch.clear();
  switch (cfg_.family) {
    case SchemeFamily::uniform:
      for (int k = 0; k < cfg_.minibatch; ++k)
        batch.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n_))));
      return;
    case SchemeFamily::importance: {
      const auto& wt = weights_[static_cast<std::size_t>(i)];
      if (!wt.active) throw std::invalid_argument("draw_batch: inactive dimension");
      const auto& sup = support_[static_cast<std::size_t>(i)];
      for (int k = 0; k < cfg_.minibatch; ++k) {
        const int pos = wt.alias->draw(rng);
        batch.push_back(sup[static_cast<std::size_t>(pos)]);
      }
      return;
    }
    case SchemeFamily::stratified: {
      const auto& strata = strata_[static_cast<std::size_t>(i)];
      for (const auto& members : strata) {
        const std::size_t pos = rng.below(members.size());
        batch.push_back(members[pos]);
      }
      return;
    }
    case SchemeFamily::stratified_importance: {
      if (!active(i)) throw std::invalid_argument("draw_batch: inactive dimension");
      const auto& strata = strata_[static_cast<std::size_t>(i)];
      const auto& alias = strata_alias_[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < strata.size(); ++k) {
        const int pos = alias[k].draw(rng);
        batch.push_back(strata[k][static_cast<std::size_t>(pos)]);
      }
      return;
    }
  }
}

std::vector<int> SubsamplingScheme::draw_batch(int i, Rng& rng) const {
  std::vector<int> batch;
  draw_batch(i, rng, batch);
  return batch;
}

double SubsamplingScheme::estimate_grad(const Dataset& data, int i,
                                        std::span<const double> xi,
                                        std::span<const int> batch) const {
  const double n = static_cast<double>(n_);
  const double m = static_cast<double>(cfg_.minibatch);
  switch (cfg_.family) {
    case SchemeFamily::uniform: {
      if (batch.size() != static_cast<std::size_t>(cfg_.minibatch))
        throw std::invalid_argument("estimate_grad: batch size mismatch");
      double s = 0.0;
      if (!cfg_.control_variate) {
        for (int j : batch) s += likelihood_grad_term(data, j, i, xi);
        return n / m * s;
      }
      const auto& col = data.column(i);
      const auto& star = ref_->term_grads_star[static_cast<std::size_t>(i)];
      for (int j : batch) {
        const int pos = support_pos(col, j);
        if (pos < 0) continue;  // x_i^j = 0: both terms vanish
        const double z = dot_row(data, j, xi);
        const double g = col[static_cast<std::size_t>(pos)].value *
                         (sigmoid(z) - static_cast<double>(data.response(j)));
        s += g - star[static_cast<std::size_t>(pos)];
      }
      return n / m * s + ref_->grad_star[static_cast<std::size_t>(i)];
    }
    case SchemeFamily::importance: {
      if (batch.size() != static_cast<std::size_t>(cfg_.minibatch))
        throw std::invalid_argument("estimate_grad: batch size mismatch");
      const auto& wt = weights_[static_cast<std::size_t>(i)];
      if (!wt.active) throw std::invalid_argument("estimate_grad: inactive dimension");
      const auto& col = data.column(i);
      double s = 0.0;
      for (int j : batch) {
        const int pos = support_pos(col, j);
        if (pos < 0)
          throw std::invalid_argument("estimate_grad: batch entry outside support");
        const SparseEntry& e = col[static_cast<std::size_t>(pos)];
        const double z = dot_row(data, j, xi);
        const double g =
            e.value * (sigmoid(z) - static_cast<double>(data.response(j)));
        const double w = wt.omega[static_cast<std::size_t>(pos)];
        if (cfg_.control_variate) {
          s += (g - ref_->term_grads_star[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(pos)]) / w;
        } else {
          s += g / w;
        }
      }
      const double base = cfg_.control_variate
                              ? ref_->grad_star[static_cast<std::size_t>(i)]
                              : 0.0;
      return s / m + base;
    }
    case SchemeFamily::stratified: {
      const auto& strata = strata_[static_cast<std::size_t>(i)];
      if (batch.size() != strata.size())
        throw std::invalid_argument("estimate_grad: batch size mismatch");
      double s = 0.0;
      for (std::size_t k = 0; k < strata.size(); ++k) {
        s += static_cast<double>(strata[k].size()) *
             likelihood_grad_term(data, batch[k], i, xi);
      }
      return s;
    }
    case SchemeFamily::stratified_importance: {
      const auto& strata = strata_[static_cast<std::size_t>(i)];
      const auto& cbar = strata_cbar_[static_cast<std::size_t>(i)];
      if (batch.size() != strata.size())
        throw std::invalid_argument("estimate_grad: batch size mismatch");
      const auto& col = data.column(i);
      double s = 0.0;
      for (std::size_t k = 0; k < strata.size(); ++k) {
        const int j = batch[k];
        const int pos = support_pos(col, j);
        if (pos < 0)
          throw std::invalid_argument("estimate_grad: batch entry outside support");
        const SparseEntry& e = col[static_cast<std::size_t>(pos)];
        const double z = dot_row(data, j, xi);
        const double g =
            e.value * (sigmoid(z) - static_cast<double>(data.response(j)));
        // within-stratum draw probability is c_j / cbar_k, so the
        // Horvitz-Thompson coefficient is cbar_k / c_j
        s += cbar[k] * g / std::fabs(e.value);
      }
      return s;
    }
  }
  return 0.0;
}

RateBound SubsamplingScheme::bound_for(int i, const ZigZagState& state,
                                       double dist_to_ref, double alpha_norm) const {
  const double a_i = state.alpha[static_cast<std::size_t>(i)];
  const double k = envelope_k_[static_cast<std::size_t>(i)];
  if (!cfg_.control_variate) return {a_i * k, 0.0};
  const double star = ref_->grad_star[static_cast<std::size_t>(i)];
  const double star_pos = std::max(0.0, state.theta[static_cast<std::size_t>(i)] * star);
  return {a_i * (star_pos + k * dist_to_ref), a_i * k * alpha_norm};
}

RateBound SubsamplingScheme::bound_for(int i, const ZigZagState& state) const {
  double dist = 0.0;
  double alpha_norm = 0.0;
  if (cfg_.control_variate) {
    for (std::size_t d = 0; d < state.xi.size(); ++d) {
      const double dx = state.xi[d] - ref_->xi_star[d];
      dist += dx * dx;
      alpha_norm += state.alpha[d] * state.alpha[d];
    }
    dist = std::sqrt(dist);
    alpha_norm = std::sqrt(alpha_norm);
  }
  return bound_for(i, state, dist, alpha_norm);
}

double refreshment_rate_oracle(const SubsamplingScheme& scheme, const Dataset& data,
                               int i, std::span<const double> xi, double theta_i) {
  // candidate lists and probabilities per batch position
  std::vector<std::vector<int>> candidates;
  std::vector<std::vector<double>> probs;
  const int m = scheme.minibatch();
  switch (scheme.family()) {
    case SchemeFamily::uniform: {
      std::vector<int> all(static_cast<std::size_t>(data.n()));
      std::iota(all.begin(), all.end(), 0);
      std::vector<double> pr(all.size(), 1.0 / static_cast<double>(data.n()));
      candidates.assign(static_cast<std::size_t>(m), all);
      probs.assign(static_cast<std::size_t>(m), pr);
      break;
    }
    case SchemeFamily::importance: {
      const auto& col = data.column(i);
      std::vector<int> support(col.size());
      std::vector<double> pr(col.size());
      for (std::size_t k = 0; k < col.size(); ++k) {
        support[k] = col[k].index;
        pr[k] = scheme.omega(i, col[k].index, data);
      }
      candidates.assign(static_cast<std::size_t>(m), support);
      probs.assign(static_cast<std::size_t>(m), pr);
      break;
    }
    case SchemeFamily::stratified: {
      for (const auto& members : scheme.strata(i)) {
        candidates.push_back(members);
        probs.emplace_back(members.size(), 1.0 / static_cast<double>(members.size()));
      }
      break;
    }
    case SchemeFamily::stratified_importance: {
      for (const auto& members : scheme.strata(i)) {
        double total = 0.0;
        std::vector<double> pr(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
          pr[k] = std::fabs(data.value_at(members[k], i));
          total += pr[k];
        }
        for (double& v : pr) v /= total;
        candidates.push_back(members);
        probs.push_back(std::move(pr));
      }
      break;
    }
  }

  double total = 1.0;
  for (const auto& c : candidates) {
    total *= static_cast<double>(c.size());
    if (total > 2e6) throw std::invalid_argument("refreshment oracle: enumeration too large");
  }

  std::vector<std::size_t> odo(candidates.size(), 0);
  std::vector<int> batch(candidates.size());
  double lambda = 0.0;
  bool done = false;
  while (!done) {
    double prob = 1.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      batch[k] = candidates[k][odo[k]];
      prob *= probs[k][odo[k]];
    }
    const double est = scheme.estimate_grad(data, i, xi, batch);
    lambda += prob * std::max(0.0, theta_i * est);
    // advance odometer
    done = true;
    for (std::size_t k = 0; k < odo.size(); ++k) {
      if (++odo[k] < candidates[k].size()) {
        done = false;
        break;
      }
      odo[k] = 0;
    }
  }
  const double true_rate = std::max(0.0, theta_i * likelihood_grad_full(data, i, xi));
  return lambda - true_rate;
}

}  // namespace zz
