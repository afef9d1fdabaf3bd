#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpomdp/belief.hpp"
#include "cpomdp/core.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/rng.hpp"

namespace cpomdp {

/// One linear piece of a finite-horizon value function over the joint
/// (state, domain) space, laid out like JointBelief data. `successors`
/// holds, per observation, the index of the stage-(n-1) alpha this
/// piece continues with; it is empty at stage 0.
struct AlphaFunction {
  std::vector<double> values;  // num_states * num_domains, state-major
  std::size_t action = 0;
  std::vector<std::int64_t> successors;

  friend bool operator==(const AlphaFunction&, const AlphaFunction&) = default;
};

struct AlphaSet {
  int stage = 0;
  std::vector<AlphaFunction> alphas;

  friend bool operator==(const AlphaSet&, const AlphaSet&) = default;
};

namespace detail {

inline bool dominates(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
  }
  return true;
}

/// Keeps the pointwise-maximal tables, dropping exact duplicates (first
/// occurrence wins) and tables dominated everywhere by a survivor.
/// Returns indices into the input, in input order.
template <typename GetValues>
std::vector<std::size_t> prune_indices(std::size_t count, GetValues&& values) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < count; ++c) {
    std::span<const double> cand = values(c);
    bool covered = false;
    for (std::size_t k : keep) {
      if (dominates(values(k), cand)) {
        covered = true;
        break;
      }
    }
    if (covered) continue;
    std::erase_if(keep, [&](std::size_t k) { return dominates(cand, values(k)); });
    keep.push_back(c);
  }
  return keep;
}

inline void canonical_sort(AlphaSet& set) {
  std::stable_sort(set.alphas.begin(), set.alphas.end(),
                   [](const AlphaFunction& a, const AlphaFunction& b) {
                     if (a.values != b.values) {
                       return std::lexicographical_compare(
                           a.values.begin(), a.values.end(), b.values.begin(),
                           b.values.end());
                     }
                     return a.action < b.action;
                   });
}

}  // namespace detail

/// Removes alphas that are pointwise dominated by another member (or
/// duplicated); the pointwise maximum over the set is unchanged, so
/// every belief keeps its value.
inline AlphaSet prune_pointwise(const AlphaSet& set) {
  std::vector<std::size_t> keep = detail::prune_indices(
      set.alphas.size(),
      [&](std::size_t i) { return std::span<const double>(set.alphas[i].values); });
  AlphaSet out;
  out.stage = set.stage;
  out.alphas.reserve(keep.size());
  for (std::size_t i : keep) out.alphas.push_back(set.alphas[i]);
  return out;
}

/// Stage-0 set: one alpha per action holding the immediate reward,
/// constant across domains, pruned and in canonical order.
inline AlphaSet initial_alpha_set(const CausalPOMDP& m,
                                  const DomainSet& domains) {
  std::size_t ns = m.num_states();
  std::size_t nd = domains.size();
  AlphaSet set;
  set.stage = 0;
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    AlphaFunction alpha;
    alpha.action = a;
    alpha.values.resize(ns * nd);
    for (std::size_t s = 0; s < ns; ++s) {
      double r = m.reward(s, a);
      for (std::size_t d = 0; d < nd; ++d) alpha.values[s * nd + d] = r;
    }
    set.alphas.push_back(std::move(alpha));
  }
  set = prune_pointwise(set);
  detail::canonical_sort(set);
  return set;
}

/// One exact value-iteration sweep: lifts a stage-(n-1) set to stage n
/// over the joint (state, domain) space. For each action the
/// observation cross-sum is built incrementally, pruning dominated
/// partial sums after every observation; dropping a dominated partial
/// is safe because every completion of it stays dominated.
inline AlphaSet backup(const JointKernel& kernel, const AlphaSet& prev) {
  const CausalPOMDP& m = kernel.model();
  std::size_t ns = m.num_states();
  std::size_t nd = kernel.domains().size();
  std::size_t no = m.num_observations();
  std::size_t dim = ns * nd;
  std::size_t j_count = prev.alphas.size();
  if (j_count == 0) throw SizeError("backup requires a non-empty alpha set");

  AlphaSet out;
  out.stage = prev.stage + 1;

  std::vector<double> scratch;
  // gam[o][j]: expected continuation of prev alpha j given observation
  // o, as a function of the pre-transition (state, domain) pair.
  std::vector<std::vector<std::vector<double>>> gam;

  struct Partial {
    std::vector<double> v;
    std::vector<std::int64_t> choice;
  };

  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    gam.assign(no, std::vector<std::vector<double>>(
                       j_count, std::vector<double>(dim, 0.0)));
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t s = 0; s < ns; ++s) {
        const double* row = kernel.row(a, d, s, scratch);
        for (std::size_t s2 = 0; s2 < ns; ++s2) {
          double w = row[s2];
          if (w == 0.0) continue;
          std::size_t o = m.observe(s2);
          std::size_t dst = s * nd + d;
          std::size_t src = s2 * nd + d;
          for (std::size_t j = 0; j < j_count; ++j) {
            gam[o][j][dst] += w * prev.alphas[j].values[src];
          }
        }
      }
    }

    std::vector<Partial> partials(1);
    partials[0].v.assign(dim, 0.0);
    for (std::size_t o = 0; o < no; ++o) {
      std::vector<Partial> next;
      next.reserve(partials.size() * j_count);
      for (const Partial& p : partials) {
        for (std::size_t j = 0; j < j_count; ++j) {
          Partial q;
          q.v.resize(dim);
          for (std::size_t i = 0; i < dim; ++i) q.v[i] = p.v[i] + gam[o][j][i];
          q.choice = p.choice;
          q.choice.push_back(std::int64_t(j));
          next.push_back(std::move(q));
        }
      }
      std::vector<std::size_t> keep = detail::prune_indices(
          next.size(),
          [&](std::size_t i) { return std::span<const double>(next[i].v); });
      partials.clear();
      partials.reserve(keep.size());
      for (std::size_t i : keep) partials.push_back(std::move(next[i]));
    }

    for (Partial& p : partials) {
      AlphaFunction alpha;
      alpha.action = a;
      alpha.successors = std::move(p.choice);
      alpha.values.resize(dim);
      for (std::size_t s = 0; s < ns; ++s) {
        double r = m.reward(s, a);
        for (std::size_t d = 0; d < nd; ++d) {
          std::size_t i = s * nd + d;
          alpha.values[i] = r + m.gamma * p.v[i];
        }
      }
      out.alphas.push_back(std::move(alpha));
    }
  }

  out = prune_pointwise(out);
  detail::canonical_sort(out);
  return out;
}

inline AlphaSet backup(const CausalPOMDP& m, const DomainSet& domains,
                       const AlphaSet& prev) {
  return backup(JointKernel(m, domains), prev);
}

/// Exact sets for stages 0 through `horizon`, in that order.
inline std::vector<AlphaSet> plan(const CausalPOMDP& m,
                                  const DomainSet& domains, int horizon) {
  if (horizon < 0) throw ValidationError("horizon must be non-negative");
  JointKernel kernel(m, domains);
  std::vector<AlphaSet> stages;
  stages.reserve(std::size_t(horizon) + 1);
  stages.push_back(initial_alpha_set(m, domains));
  for (int n = 1; n <= horizon; ++n) {
    stages.push_back(backup(kernel, stages.back()));
  }
  return stages;
}

/// Value of a belief under a set: the maximum dot product. Returns the
/// value and the index of the maximizing alpha; ties go to the lowest
/// index, which is deterministic because sets are kept in canonical
/// order.
inline std::pair<double, std::size_t> value_at(const AlphaSet& set,
                                               const JointBelief& b) {
  if (set.alphas.empty()) throw LookupError("alpha set is empty");
  const std::vector<double>& p = b.data();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < set.alphas.size(); ++i) {
    const std::vector<double>& v = set.alphas[i].values;
    if (v.size() != p.size()) {
      throw SizeError("alpha length " + std::to_string(v.size()) +
                      " does not match belief length " +
                      std::to_string(p.size()));
    }
    double dot = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) dot += v[k] * p[k];
    if (dot > best) {
      best = dot;
      arg = i;
    }
  }
  return {best, arg};
}

inline std::size_t greedy_action(const AlphaSet& set, const JointBelief& b) {
  return set.alphas[value_at(set, b).second].action;
}

/// Fixed reactive controller: an opening action, then an action per
/// observation label.
struct ReactivePolicy {
  std::size_t initial_action = 0;
  std::vector<std::size_t> by_observation;  // one entry per observation

  friend bool operator==(const ReactivePolicy&,
                         const ReactivePolicy&) = default;
};

/// Controller that tracks its own joint belief over a hypothesis set
/// of domains and acts greedily against precomputed alpha sets. With
/// k steps remaining it uses the stage-k set when present, otherwise
/// the nearest stage available.
struct GreedyPolicy {
  std::vector<AlphaSet> stages;  // ascending by stage
  DomainSet domains;
  std::vector<double> domain_prior;  // one entry per domain

  friend bool operator==(const GreedyPolicy&, const GreedyPolicy&) = default;
};

struct PolicySpec {
  std::variant<ReactivePolicy, GreedyPolicy> policy;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

namespace detail {

inline const AlphaSet& stage_for(const std::vector<AlphaSet>& stages,
                                 std::size_t remaining) {
  if (stages.empty()) throw LookupError("greedy policy has no alpha sets");
  const AlphaSet* best = &stages.front();
  for (const AlphaSet& s : stages) {
    if (s.stage <= int(remaining) &&
        (best->stage > int(remaining) || s.stage > best->stage)) {
      best = &s;
    }
  }
  return *best;
}

}  // namespace detail

/// Executes a policy step by step. Copyable, so exhaustive evaluators
/// can branch it per observation; greedy policies carry their own
/// belief filtered under their own domain set, independent of the
/// environment's true domain.
class PolicyRunner {
 public:
  PolicyRunner(const CausalPOMDP& m, const PolicySpec& spec,
               std::span<const double> initial_state_belief)
      : model_(&m), spec_(&spec) {
    if (const auto* g = std::get_if<GreedyPolicy>(&spec.policy)) {
      if (g->domain_prior.size() != g->domains.size()) {
        throw SizeError("domain prior length does not match domain set");
      }
      kernel_ = std::make_shared<JointKernel>(m, g->domains);
      belief_ = JointBelief::product(initial_state_belief, g->domain_prior);
    } else {
      const auto& r = std::get<ReactivePolicy>(spec.policy);
      if (r.by_observation.size() != m.num_observations()) {
        throw SizeError("reactive policy covers " +
                        std::to_string(r.by_observation.size()) +
                        " observations, expected " +
                        std::to_string(m.num_observations()));
      }
    }
  }

  /// Action with `remaining` further actions to take after this one.
  std::size_t action(std::size_t remaining) const {
    if (const auto* g = std::get_if<GreedyPolicy>(&spec_->policy)) {
      return greedy_action(detail::stage_for(g->stages, remaining), *belief_);
    }
    const auto& r = std::get<ReactivePolicy>(spec_->policy);
    return last_obs_ ? r.by_observation[*last_obs_] : r.initial_action;
  }

  /// Feeds back the observation that followed `action`.
  void observe(std::size_t action, std::size_t obs) {
    if (std::holds_alternative<GreedyPolicy>(spec_->policy)) {
      belief_ = update_belief(*kernel_, *belief_, action, obs);
    } else {
      last_obs_ = obs;
    }
  }

  const std::optional<JointBelief>& belief() const { return belief_; }

 private:
  const CausalPOMDP* model_;
  const PolicySpec* spec_;
  std::shared_ptr<const JointKernel> kernel_;  // shared across copies
  std::optional<JointBelief> belief_;
  std::optional<std::size_t> last_obs_;
};

/// Exact expected discounted return of a policy when the true domain
/// is known: a full enumeration over observation sequences of the
/// given depth, filtering a state-only belief under the known shifted
/// kernel. `horizon` counts further actions after the first, so h = 0
/// evaluates a single action. Throws BudgetExceeded when the tree
/// outgrows `node_budget`; Monte Carlo estimation is the fallback at
/// that point.
inline double evaluate_policy_known_shift(
    const CausalPOMDP& m, const DomainSpec& sigma, const PolicySpec& spec,
    std::span<const double> initial_state_belief, std::size_t horizon,
    std::size_t node_budget = 1'000'000, std::size_t* nodes_out = nullptr) {
  ShiftedTransition shifted = shifted_transition(m, sigma);
  std::size_t ns = m.num_states();
  std::size_t nodes = 0;
  std::vector<double> scratch(ns);

  std::function<double(const std::vector<double>&, PolicyRunner, std::size_t)>
      rec = [&](const std::vector<double>& bs, PolicyRunner runner,
                std::size_t remaining) -> double {
    if (++nodes > node_budget) {
      throw BudgetExceeded(
          "policy evaluation exceeded " + std::to_string(node_budget) +
              " belief nodes; use a Monte Carlo estimate instead",
          nodes, node_budget);
    }
    std::size_t a = runner.action(remaining);
    double value = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (bs[s] != 0.0) value += bs[s] * m.reward(s, a);
    }
    if (remaining == 0) return value;

    std::vector<double> pred(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (bs[s] == 0.0) continue;
      transition_row(m, shifted, s, a, scratch);
      for (std::size_t s2 = 0; s2 < ns; ++s2) pred[s2] += bs[s] * scratch[s2];
    }
    std::vector<double> mass(m.num_observations(), 0.0);
    for (std::size_t s2 = 0; s2 < ns; ++s2) mass[m.observe(s2)] += pred[s2];

    for (std::size_t o = 0; o < mass.size(); ++o) {
      if (mass[o] <= 0.0) continue;
      std::vector<double> next(ns, 0.0);
      for (std::size_t s2 = 0; s2 < ns; ++s2) {
        if (m.observe(s2) == o) next[s2] = pred[s2] / mass[o];
      }
      PolicyRunner branch = runner;
      branch.observe(a, o);
      value += m.gamma * mass[o] * rec(next, std::move(branch), remaining - 1);
    }
    return value;
  };

  std::vector<double> b0(initial_state_belief.begin(),
                         initial_state_belief.end());
  if (b0.size() != ns) {
    throw SizeError("initial belief length does not match state count");
  }
  double value = rec(b0, PolicyRunner(m, spec, initial_state_belief), horizon);
  if (nodes_out) *nodes_out = nodes;
  return value;
}

struct ConvexityViolation {
  double lambda = 0.0;
  double gap = 0.0;

  friend bool operator==(const ConvexityViolation&,
                         const ConvexityViolation&) = default;
};

struct ConvexityReport {
  std::size_t samples = 0;
  std::vector<ConvexityViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Samples random (b1, b2, lambda) triples and reports every point
/// where `value` rises above the chord between the endpoints by more
/// than `tol`; a convex function produces no violations.
inline ConvexityReport check_convexity(
    const std::function<double(std::span<const double>)>& value,
    std::size_t dim, std::size_t samples, std::uint64_t seed,
    double tol = 1e-9) {
  Rng rng(seed);
  ConvexityReport report;
  report.samples = samples;
  std::vector<double> mid(dim);
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> b1 = sample_simplex(rng, dim);
    std::vector<double> b2 = sample_simplex(rng, dim);
    double lam = rng.uniform01();
    for (std::size_t i = 0; i < dim; ++i) {
      mid[i] = lam * b1[i] + (1.0 - lam) * b2[i];
    }
    double gap = value(mid) - (lam * value(b1) + (1.0 - lam) * value(b2));
    if (gap > tol) report.violations.push_back({lam, gap});
  }
  return report;
}

/// Convexity check specialized to an alpha set, with a second test per
/// sample: the measured value must equal the best per-alpha affine
/// interpolant along the segment, since each alpha is linear.
inline ConvexityReport check_convexity(const AlphaSet& set,
                                       std::size_t samples, std::uint64_t seed,
                                       double tol = 1e-9) {
  if (set.alphas.empty()) throw LookupError("alpha set is empty");
  std::size_t dim = set.alphas[0].values.size();
  auto value = [&](std::span<const double> p) {
    double best = -std::numeric_limits<double>::infinity();
    for (const AlphaFunction& alpha : set.alphas) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += alpha.values[i] * p[i];
      best = std::max(best, dot);
    }
    return best;
  };

  Rng rng(seed);
  ConvexityReport report;
  report.samples = samples;
  std::vector<double> mid(dim);
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> b1 = sample_simplex(rng, dim);
    std::vector<double> b2 = sample_simplex(rng, dim);
    double lam = rng.uniform01();
    for (std::size_t i = 0; i < dim; ++i) {
      mid[i] = lam * b1[i] + (1.0 - lam) * b2[i];
    }
    double measured = value(mid);
    double chord = lam * value(b1) + (1.0 - lam) * value(b2);
    if (measured - chord > tol) {
      report.violations.push_back({lam, measured - chord});
      continue;
    }
    // Max over alphas of the interpolated endpoint dot products: must
    // reproduce the measured value up to rounding.
    double best_affine = -std::numeric_limits<double>::infinity();
    for (const AlphaFunction& alpha : set.alphas) {
      double d1 = 0.0, d2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        d1 += alpha.values[i] * b1[i];
        d2 += alpha.values[i] * b2[i];
      }
      best_affine = std::max(best_affine, lam * d1 + (1.0 - lam) * d2);
    }
    if (std::abs(measured - best_affine) > tol) {
      report.violations.push_back({lam, measured - best_affine});
    }
  }
  return report;
}

}  // namespace cpomdp
