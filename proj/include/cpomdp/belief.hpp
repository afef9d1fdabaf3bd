#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cpomdp/core.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/shift.hpp"

namespace cpomdp {

/// Joint distribution over (state, domain), stored state-major:
/// entry s * num_domains + d is the mass on state s under domain d.
class JointBelief {
 public:
  JointBelief() = default;

  JointBelief(std::size_t num_states, std::size_t num_domains,
              std::vector<double> p)
      : ns_(num_states), nd_(num_domains), p_(std::move(p)) {
    if (p_.size() != ns_ * nd_ || ns_ == 0 || nd_ == 0) {
      throw SizeError("belief has " + std::to_string(p_.size()) +
                      " entries, expected " + std::to_string(ns_ * nd_));
    }
    double sum = 0.0;
    for (double x : p_) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw ValidationError("belief entry outside [0, 1]");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kArithTol) {
      throw ValidationError("belief sums to " + std::to_string(sum));
    }
  }

  static JointBelief uniform(std::size_t num_states, std::size_t num_domains) {
    std::vector<double> p(num_states * num_domains,
                          1.0 / double(num_states * num_domains));
    return JointBelief(num_states, num_domains, std::move(p));
  }

  /// Independent product of a state distribution and a domain
  /// distribution.
  static JointBelief product(std::span<const double> state_dist,
                             std::span<const double> domain_dist) {
    std::vector<double> p;
    p.reserve(state_dist.size() * domain_dist.size());
    for (double ps : state_dist) {
      for (double pd : domain_dist) p.push_back(ps * pd);
    }
    return JointBelief(state_dist.size(), domain_dist.size(), std::move(p));
  }

  std::size_t num_states() const { return ns_; }
  std::size_t num_domains() const { return nd_; }
  double at(std::size_t state, std::size_t domain) const {
    return p_[state * nd_ + domain];
  }
  const std::vector<double>& data() const { return p_; }

  std::vector<double> marginal_state() const {
    std::vector<double> out(ns_, 0.0);
    for (std::size_t s = 0; s < ns_; ++s) {
      for (std::size_t d = 0; d < nd_; ++d) out[s] += p_[s * nd_ + d];
    }
    return out;
  }

  std::vector<double> marginal_domain() const {
    std::vector<double> out(nd_, 0.0);
    for (std::size_t s = 0; s < ns_; ++s) {
      for (std::size_t d = 0; d < nd_; ++d) out[d] += p_[s * nd_ + d];
    }
    return out;
  }

  friend bool operator==(const JointBelief&, const JointBelief&) = default;

 private:
  std::size_t ns_ = 0;
  std::size_t nd_ = 0;
  std::vector<double> p_;
};

/// Dense transition rows are cached only while the total cache stays
/// under this many doubles; larger problems rebuild rows on the fly.
inline constexpr std::size_t kDenseKernelCap = 4'000'000;

/// Precomputed per-domain transition machinery for one model and one
/// domain set. Build once, then share across filter, planner, and
/// search calls; the model and domain set must outlive the kernel.
class JointKernel {
 public:
  JointKernel(const CausalPOMDP& m, const DomainSet& domains)
      : model_(&m), domains_(&domains) {
    shifted_.reserve(domains.size());
    for (const DomainSpec& d : domains.all()) {
      shifted_.push_back(shifted_transition(m, d));
    }
    std::size_t ns = m.num_states();
    std::size_t need = m.num_actions() * domains.size() * ns * ns;
    dense_ = need <= kDenseKernelCap;
    if (dense_) {
      dense_rows_.resize(m.num_actions() * domains.size() * ns * ns);
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        for (std::size_t d = 0; d < domains.size(); ++d) {
          for (std::size_t s = 0; s < ns; ++s) {
            std::span<double> row(
                dense_rows_.data() + (((a * domains.size()) + d) * ns + s) * ns,
                ns);
            transition_row(m, shifted_[d], s, a, row);
          }
        }
      }
    }
  }

  const CausalPOMDP& model() const { return *model_; }
  const DomainSet& domains() const { return *domains_; }
  const ShiftedTransition& shifted(std::size_t domain) const {
    return shifted_[domain];
  }

  /// Next-state distribution from `state` under `action` in `domain`.
  /// Returns a pointer into the dense cache when available, otherwise
  /// fills and returns `scratch`.
  const double* row(std::size_t action, std::size_t domain, std::size_t state,
                    std::vector<double>& scratch) const {
    std::size_t ns = model_->num_states();
    if (dense_) {
      return dense_rows_.data() +
             (((action * domains_->size()) + domain) * ns + state) * ns;
    }
    scratch.resize(ns);
    transition_row(*model_, shifted_[domain], state, action,
                   std::span<double>(scratch));
    return scratch.data();
  }

  /// Unnormalized predicted joint after taking `action` from `b`,
  /// before conditioning on any observation. Layout matches
  /// JointBelief: out[s' * D + d].
  void predict(const JointBelief& b, std::size_t action,
               std::vector<double>& out) const {
    std::size_t ns = model_->num_states();
    std::size_t nd = domains_->size();
    out.assign(ns * nd, 0.0);
    std::vector<double> scratch;
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t s = 0; s < ns; ++s) {
        double w = b.at(s, d);
        if (w == 0.0) continue;
        const double* r = row(action, d, s, scratch);
        for (std::size_t s2 = 0; s2 < ns; ++s2) {
          if (r[s2] != 0.0) out[s2 * nd + d] += w * r[s2];
        }
      }
    }
  }

 private:
  const CausalPOMDP* model_;
  const DomainSet* domains_;
  std::vector<ShiftedTransition> shifted_;
  bool dense_ = false;
  std::vector<double> dense_rows_;  // [action][domain][s][s']
};

/// Probability of seeing `obs` after taking `action` from `b`: the
/// predicted mass on states whose projection matches the observation.
inline double observation_likelihood(const JointKernel& k,
                                     const JointBelief& b, std::size_t action,
                                     std::size_t obs) {
  const CausalPOMDP& m = k.model();
  std::size_t nd = k.domains().size();
  std::vector<double> pred;
  k.predict(b, action, pred);
  double sum = 0.0;
  for (std::size_t s2 = 0; s2 < m.num_states(); ++s2) {
    if (m.observe(s2) != obs) continue;
    for (std::size_t d = 0; d < nd; ++d) sum += pred[s2 * nd + d];
  }
  return sum;
}

/// Exact Bayes step on the joint (state, domain) belief: predict under
/// each domain's shifted kernel, keep the states consistent with the
/// observation, renormalize. Throws ImpossibleObservation if the
/// observation has zero predicted likelihood; `step` is only used to
/// label that error.
inline JointBelief update_belief(const JointKernel& k, const JointBelief& b,
                                 std::size_t action, std::size_t obs,
                                 std::ptrdiff_t step = -1) {
  const CausalPOMDP& m = k.model();
  std::size_t ns = m.num_states();
  std::size_t nd = k.domains().size();
  std::vector<double> pred;
  k.predict(b, action, pred);
  double sum = 0.0;
  for (std::size_t s2 = 0; s2 < ns; ++s2) {
    bool match = m.observe(s2) == obs;
    for (std::size_t d = 0; d < nd; ++d) {
      if (match) {
        sum += pred[s2 * nd + d];
      } else {
        pred[s2 * nd + d] = 0.0;
      }
    }
  }
  if (!(sum > 0.0)) {
    throw ImpossibleObservation(
        "observation \"" + observation_label(m, obs) +
            "\" has zero predicted likelihood under every tracked domain" +
            (step >= 0 ? " at step " + std::to_string(step) : ""),
        sum, step);
  }
  for (double& x : pred) x /= sum;
  return JointBelief(ns, nd, std::move(pred));
}

/// Posterior and likelihood for every observation at once, sharing one
/// prediction pass. Entries with zero likelihood carry an empty belief.
struct ObservationPosterior {
  double likelihood = 0.0;
  JointBelief belief;
};

inline std::vector<ObservationPosterior> posterior_partition(
    const JointKernel& k, const JointBelief& b, std::size_t action) {
  const CausalPOMDP& m = k.model();
  std::size_t ns = m.num_states();
  std::size_t nd = k.domains().size();
  std::vector<double> pred;
  k.predict(b, action, pred);
  std::vector<ObservationPosterior> out(m.num_observations());
  for (std::size_t s2 = 0; s2 < ns; ++s2) {
    std::size_t o = m.observe(s2);
    for (std::size_t d = 0; d < nd; ++d) {
      out[o].likelihood += pred[s2 * nd + d];
    }
  }
  for (std::size_t o = 0; o < out.size(); ++o) {
    if (out[o].likelihood <= 0.0) continue;
    std::vector<double> p(ns * nd, 0.0);
    for (std::size_t s2 = 0; s2 < ns; ++s2) {
      if (m.observe(s2) != o) continue;
      for (std::size_t d = 0; d < nd; ++d) {
        p[s2 * nd + d] = pred[s2 * nd + d] / out[o].likelihood;
      }
    }
    out[o].belief = JointBelief(ns, nd, std::move(p));
  }
  return out;
}

inline JointBelief uniform_joint_belief(const CausalPOMDP& m,
                                        const DomainSet& domains) {
  return JointBelief::uniform(m.num_states(), domains.size());
}

/// Convenience overloads that build the kernel per call. Prefer the
/// JointKernel forms when filtering repeatedly.
inline double observation_likelihood(const CausalPOMDP& m,
                                     const DomainSet& domains,
                                     const JointBelief& b, std::size_t action,
                                     std::size_t obs) {
  return observation_likelihood(JointKernel(m, domains), b, action, obs);
}

inline JointBelief update_belief(const CausalPOMDP& m, const DomainSet& domains,
                                 const JointBelief& b, std::size_t action,
                                 std::size_t obs) {
  return update_belief(JointKernel(m, domains), b, action, obs);
}

/// One recorded interaction: the action taken and the observation that
/// followed.
struct TraceStep {
  std::size_t action = 0;
  std::size_t observation = 0;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

/// Runs the exact filter along a trace. Entry k is the belief after
/// the first k steps, so entry 0 is the prior and the result has
/// trace.size() + 1 entries. An impossible observation is reported
/// with its step index.
inline std::vector<JointBelief> filter_trace(
    const CausalPOMDP& m, const DomainSet& domains, const JointBelief& initial,
    const std::vector<TraceStep>& trace) {
  JointKernel kernel(m, domains);
  std::vector<JointBelief> out;
  out.reserve(trace.size() + 1);
  out.push_back(initial);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out.push_back(update_belief(kernel, out.back(), trace[i].action,
                                trace[i].observation, std::ptrdiff_t(i)));
  }
  return out;
}

}  // namespace cpomdp
