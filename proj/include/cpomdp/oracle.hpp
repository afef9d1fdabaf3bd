#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cpomdp/belief.hpp"
#include "cpomdp/core.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/planning.hpp"

namespace cpomdp {

struct OracleConfig {
  std::size_t node_budget = 1'000'000;
  double tolerance = 1e-9;
};

namespace detail {

inline void charge_node(std::size_t& nodes, std::size_t budget,
                        const char* what) {
  if (++nodes > budget) {
    throw BudgetExceeded(std::string(what) + " exceeded " +
                             std::to_string(budget) + " belief nodes",
                         nodes, budget);
  }
}

}  // namespace detail

/// Ground-truth optimal value by brute force: a full expectimax
/// recursion over the belief tree, maximizing over actions and
/// averaging over observations, with each child belief produced by the
/// exact filter. `horizon` counts further actions after the first.
/// Deliberately direct; every expanded belief counts against the node
/// budget.
inline double expectimax_value(const JointKernel& kernel, const JointBelief& b,
                               std::size_t horizon,
                               const OracleConfig& config = {},
                               std::size_t* nodes_out = nullptr) {
  const CausalPOMDP& m = kernel.model();
  std::size_t nd = kernel.domains().size();
  std::size_t nodes = 0;

  std::function<double(const JointBelief&, std::size_t)> rec =
      [&](const JointBelief& belief, std::size_t remaining) -> double {
    detail::charge_node(nodes, config.node_budget, "expectimax search");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      double value = 0.0;
      for (std::size_t s = 0; s < m.num_states(); ++s) {
        for (std::size_t d = 0; d < nd; ++d) {
          double w = belief.at(s, d);
          if (w != 0.0) value += w * m.reward(s, a);
        }
      }
      if (remaining > 0) {
        std::vector<ObservationPosterior> parts =
            posterior_partition(kernel, belief, a);
        for (const ObservationPosterior& part : parts) {
          if (part.likelihood <= 0.0) continue;
          value +=
              m.gamma * part.likelihood * rec(part.belief, remaining - 1);
        }
      }
      best = std::max(best, value);
    }
    return best;
  };

  double value = rec(b, horizon);
  if (nodes_out) *nodes_out = nodes;
  return value;
}

inline double expectimax_value(const CausalPOMDP& m, const DomainSet& domains,
                               const JointBelief& b, std::size_t horizon,
                               const OracleConfig& config = {},
                               std::size_t* nodes_out = nullptr) {
  return expectimax_value(JointKernel(m, domains), b, horizon, config,
                          nodes_out);
}

/// Ground-truth expected return of a fixed policy under a known true
/// domain. Wraps the true domain in a singleton hypothesis set and
/// walks every observation branch with the exact filter; written
/// separately from the planner's evaluator so the two can check each
/// other.
inline double oracle_policy_value(const CausalPOMDP& m,
                                  const DomainSpec& sigma,
                                  const PolicySpec& spec,
                                  std::span<const double> initial_state_belief,
                                  std::size_t horizon,
                                  const OracleConfig& config = {},
                                  std::size_t* nodes_out = nullptr) {
  DomainSet single(std::vector<DomainSpec>{sigma});
  JointKernel kernel(m, single);
  std::size_t nodes = 0;

  std::function<double(const JointBelief&, PolicyRunner, std::size_t)> rec =
      [&](const JointBelief& belief, PolicyRunner runner,
          std::size_t remaining) -> double {
    detail::charge_node(nodes, config.node_budget, "policy evaluation");
    std::size_t a = runner.action(remaining);
    double value = 0.0;
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      double w = belief.at(s, 0);
      if (w != 0.0) value += w * m.reward(s, a);
    }
    if (remaining == 0) return value;
    std::vector<ObservationPosterior> parts =
        posterior_partition(kernel, belief, a);
    for (std::size_t o = 0; o < parts.size(); ++o) {
      if (parts[o].likelihood <= 0.0) continue;
      PolicyRunner branch = runner;
      branch.observe(a, o);
      value += m.gamma * parts[o].likelihood *
               rec(parts[o].belief, std::move(branch), remaining - 1);
    }
    return value;
  };

  std::vector<double> one{1.0};
  JointBelief b0 = JointBelief::product(initial_state_belief, one);
  double value = rec(b0, PolicyRunner(m, spec, initial_state_belief), horizon);
  if (nodes_out) *nodes_out = nodes;
  return value;
}

}  // namespace cpomdp
