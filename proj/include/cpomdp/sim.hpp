#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpomdp/belief.hpp"
#include "cpomdp/core.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/planning.hpp"
#include "cpomdp/rng.hpp"

namespace cpomdp {

/// One sampled episode. Step t records the action taken, the state the
/// environment moved to, that state's observation, and the reward
/// earned in the pre-transition state.
struct Trajectory {
  std::uint64_t seed = 0;
  std::string domain;
  std::size_t initial_state = 0;

  struct Step {
    std::size_t action = 0;
    std::size_t state = 0;
    std::size_t observation = 0;
    double reward = 0.0;

    friend bool operator==(const Step&, const Step&) = default;
  };
  std::vector<Step> steps;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

namespace detail {

inline std::vector<double> state_prior_or_uniform(
    const CausalPOMDP& m, std::span<const double> prior) {
  if (prior.empty()) {
    return std::vector<double>(m.num_states(), 1.0 / double(m.num_states()));
  }
  if (prior.size() != m.num_states()) {
    throw SizeError("state prior length does not match state count");
  }
  return std::vector<double>(prior.begin(), prior.end());
}

}  // namespace detail

/// Samples one episode of `steps` actions under the true domain.
/// The policy sees only observations; the sampler sees states. An
/// empty state prior means uniform.
inline Trajectory sample_episode(const CausalPOMDP& m, const DomainSpec& sigma,
                                 const PolicySpec& policy, std::size_t steps,
                                 std::uint64_t seed,
                                 std::span<const double> state_prior = {}) {
  std::vector<double> prior = detail::state_prior_or_uniform(m, state_prior);
  ShiftedTransition shifted = shifted_transition(m, sigma);
  Rng rng(seed);

  Trajectory traj;
  traj.seed = seed;
  traj.domain = sigma.name;
  traj.initial_state = rng.categorical(prior);

  PolicyRunner runner(m, policy, prior);
  std::vector<double> row(m.num_states());
  std::size_t s = traj.initial_state;
  for (std::size_t t = 0; t < steps; ++t) {
    std::size_t remaining = steps - 1 - t;
    std::size_t a = runner.action(remaining);
    double r = m.reward(s, a);
    transition_row(m, shifted, s, a, row);
    std::size_t s2 = rng.categorical(row);
    std::size_t o = m.observe(s2);
    runner.observe(a, o);
    traj.steps.push_back({a, s2, o, r});
    s = s2;
  }
  return traj;
}

/// Repeated-episode study of how fast the filter concentrates on the
/// domain that actually generated the data. Episode k runs on the
/// derived seed (base, k) so any single episode can be reproduced.
struct IdentificationReport {
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::vector<std::string> domains;
  std::string true_domain;
  std::size_t true_index = 0;

  /// posteriors[episode][t][d]: filter's domain marginal after t steps
  /// (t = 0 is the prior).
  std::vector<std::vector<std::vector<double>>> posteriors;
  /// Mean posterior mass on the true domain after t steps.
  std::vector<double> mean_true_mass;
  /// Episodes where the filter hit a zero-likelihood observation; their
  /// posterior is frozen from that step on.
  std::vector<std::size_t> flagged_episodes;
};

inline IdentificationReport identification_experiment(
    const CausalPOMDP& m, const DomainSet& domains,
    const std::string& true_domain, const PolicySpec& policy,
    std::size_t steps, std::size_t episodes, std::uint64_t seed,
    std::span<const double> state_prior = {}) {
  IdentificationReport rep;
  rep.seed = seed;
  rep.rng_algorithm = std::string(Rng::kAlgorithm);
  rep.episodes = episodes;
  rep.steps = steps;
  for (const DomainSpec& d : domains.all()) rep.domains.push_back(d.name);
  rep.true_domain = true_domain;
  rep.true_index = domains.index_of(true_domain);

  std::vector<double> prior = detail::state_prior_or_uniform(m, state_prior);
  std::vector<double> domain_prior(domains.size(), 1.0 / double(domains.size()));
  ShiftedTransition env =
      shifted_transition(m, domains[rep.true_index]);
  JointKernel filter(m, domains);

  rep.posteriors.resize(episodes);
  rep.mean_true_mass.assign(steps + 1, 0.0);

  std::vector<double> row(m.num_states());
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng(Rng::derive(seed, e));
    std::size_t s = rng.categorical(prior);
    JointBelief b = JointBelief::product(prior, domain_prior);
    PolicyRunner runner(m, policy, prior);

    auto& eps = rep.posteriors[e];
    eps.reserve(steps + 1);
    eps.push_back(b.marginal_domain());

    bool flagged = false;
    for (std::size_t t = 0; t < steps; ++t) {
      std::size_t a = runner.action(steps - 1 - t);
      transition_row(m, env, s, a, row);
      std::size_t s2 = rng.categorical(row);
      std::size_t o = m.observe(s2);
      if (!flagged) {
        try {
          b = update_belief(filter, b, a, o, std::ptrdiff_t(t));
        } catch (const ImpossibleObservation&) {
          flagged = true;
          rep.flagged_episodes.push_back(e);
        }
      }
      eps.push_back(b.marginal_domain());
      runner.observe(a, o);
      s = s2;
    }
    for (std::size_t t = 0; t <= steps; ++t) {
      rep.mean_true_mass[t] += eps[t][rep.true_index];
    }
  }
  if (episodes > 0) {
    for (double& x : rep.mean_true_mass) x /= double(episodes);
  }
  return rep;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t episodes = 0;
};

/// Monte Carlo estimate of a policy's expected discounted return under
/// a known domain; comparable to the exact evaluator with the same
/// horizon (horizon + 1 actions per episode).
inline McEstimate monte_carlo_policy_value(
    const CausalPOMDP& m, const DomainSpec& sigma, const PolicySpec& policy,
    std::size_t horizon, std::size_t episodes, std::uint64_t seed,
    std::span<const double> state_prior = {}) {
  if (episodes == 0) throw ValidationError("episode count must be positive");
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Trajectory traj = sample_episode(m, sigma, policy, horizon + 1,
                                     Rng::derive(seed, e), state_prior);
    double g = 0.0;
    double disc = 1.0;
    for (const Trajectory::Step& step : traj.steps) {
      g += disc * step.reward;
      disc *= m.gamma;
    }
    sum += g;
    sumsq += g * g;
  }
  McEstimate est;
  est.episodes = episodes;
  est.mean = sum / double(episodes);
  if (episodes > 1) {
    double var =
        (sumsq - sum * sum / double(episodes)) / double(episodes - 1);
    est.std_error = std::sqrt(std::max(var, 0.0) / double(episodes));
  }
  return est;
}

}  // namespace cpomdp
