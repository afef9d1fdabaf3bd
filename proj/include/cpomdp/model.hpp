#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpomdp/core.hpp"
#include "cpomdp/shift.hpp"

namespace cpomdp {

struct VariableSpec {
  std::string name;
  std::vector<std::string> values;

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

/// Parents of one next-slice variable, split by slice. Current-slice
/// parents must be declared strictly before the child, which keeps the
/// within-slice dependency graph acyclic by construction.
struct ParentSpec {
  std::vector<std::string> prev;
  std::vector<std::string> curr;

  friend bool operator==(const ParentSpec&, const ParentSpec&) = default;
};

struct TwoSliceGraph {
  std::vector<ParentSpec> parents;  // one entry per variable, same order

  friend bool operator==(const TwoSliceGraph&, const TwoSliceGraph&) = default;
};

/// Per-variable, per-action conditional tables. The transition kernel
/// factorizes as the product of these over variables in declared order.
struct FactoredTransition {
  std::vector<std::vector<ConditionalTable>> tables;  // [variable][action]

  friend bool operator==(const FactoredTransition&,
                         const FactoredTransition&) = default;
};

/// Reward as a function of an action and a subset of state variables.
/// `by_action[a]` is a row-major table over the listed variables'
/// values, first listed variable most significant.
struct RewardTable {
  std::vector<std::string> vars;
  std::vector<std::vector<double>> by_action;

  friend bool operator==(const RewardTable&, const RewardTable&) = default;
};

/// Deterministic observation: the projection of the new state onto the
/// listed variables. Observations carry no noise of their own; sensor
/// noise lives in the transition tables of the observed variables.
struct ObservationProjection {
  std::vector<std::string> vars;

  friend bool operator==(const ObservationProjection&,
                         const ObservationProjection&) = default;
};

struct ValidationFinding {
  std::string path;
  std::string rule;
  std::string detail;

  friend bool operator==(const ValidationFinding&,
                         const ValidationFinding&) = default;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;

  bool ok() const { return findings.empty(); }

  void add(std::string path, std::string rule, std::string detail) {
    findings.push_back({std::move(path), std::move(rule), std::move(detail)});
  }
};

class CausalPOMDP;
ValidationReport validate_model(const CausalPOMDP& m);

/// Factored partially observed Markov decision process. Fill the
/// public specification fields (or use the loader), then call
/// finalize() before using any derived accessor or operation.
class CausalPOMDP {
 public:
  std::vector<VariableSpec> variables;
  std::vector<std::string> actions;
  TwoSliceGraph graph;
  FactoredTransition transition;
  RewardTable reward_spec;
  ObservationProjection observation;
  double gamma = 0.0;

  struct ParentRef {
    bool prev = true;     // previous slice if true, current slice if false
    std::size_t var = 0;  // index of the parent variable

    friend bool operator==(const ParentRef&, const ParentRef&) = default;
  };

  /// Resolves names, checks every model invariant, and precomputes the
  /// index tables used by the operations below. Throws ValidationError
  /// naming the first finding if the model is invalid.
  void finalize() {
    ValidationReport report = validate_model(*this);
    if (!report.ok()) {
      const ValidationFinding& f = report.findings.front();
      throw ValidationError("invalid model: " + f.path + ": " + f.detail +
                            (report.findings.size() > 1
                                 ? " (and " +
                                       std::to_string(report.findings.size() -
                                                      1) +
                                       " more findings)"
                                 : ""));
    }

    std::size_t n = variables.size();
    radices_.resize(n);
    for (std::size_t i = 0; i < n; ++i) radices_[i] = variables[i].values.size();

    num_states_ = 1;
    for (std::size_t r : radices_) num_states_ *= r;

    parent_refs_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      for (const std::string& p : graph.parents[i].prev) {
        parent_refs_[i].push_back({true, unchecked_variable_index(p)});
      }
      for (const std::string& p : graph.parents[i].curr) {
        parent_refs_[i].push_back({false, unchecked_variable_index(p)});
      }
    }

    reward_vars_.clear();
    for (const std::string& v : reward_spec.vars) {
      reward_vars_.push_back(unchecked_variable_index(v));
    }
    obs_vars_.clear();
    for (const std::string& v : observation.vars) {
      obs_vars_.push_back(unchecked_variable_index(v));
    }

    num_observations_ = 1;
    for (std::size_t v : obs_vars_) num_observations_ *= radices_[v];

    reward_row_of_state_.resize(num_states_);
    obs_of_state_.resize(num_states_);
    std::vector<std::size_t> digits(n);
    for (std::size_t s = 0; s < num_states_; ++s) {
      unpack_index(s, radices_, digits);
      std::size_t r = 0;
      for (std::size_t v : reward_vars_) r = r * radices_[v] + digits[v];
      reward_row_of_state_[s] = r;
      std::size_t o = 0;
      for (std::size_t v : obs_vars_) o = o * radices_[v] + digits[v];
      obs_of_state_[s] = o;
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }

  std::size_t num_variables() const { return variables.size(); }
  std::size_t num_actions() const { return actions.size(); }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_observations() const { return num_observations_; }
  const std::vector<std::size_t>& radices() const { return radices_; }
  const std::vector<ParentRef>& parent_refs(std::size_t var) const {
    return parent_refs_[var];
  }
  const std::vector<std::size_t>& observable_vars() const { return obs_vars_; }

  std::size_t variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].name == name) return i;
    }
    throw LookupError("unknown variable \"" + std::string(name) + "\"");
  }

  std::size_t action_index(std::string_view name) const {
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (actions[i] == name) return i;
    }
    throw LookupError("unknown action \"" + std::string(name) + "\"");
  }

  std::size_t value_index(std::size_t var, std::string_view value) const {
    const auto& vals = variables[var].values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] == value) return i;
    }
    throw LookupError("variable \"" + variables[var].name +
                      "\" has no value \"" + std::string(value) + "\"");
  }

  /// Canonical state index of a full assignment (one value index per
  /// variable, declared order, first variable most significant).
  std::size_t state_index(std::span<const std::size_t> digits) const {
    if (digits.size() != radices_.size()) {
      throw SizeError("assignment has " + std::to_string(digits.size()) +
                      " values, expected " +
                      std::to_string(radices_.size()));
    }
    return pack_index(digits, radices_);
  }

  std::size_t state_index(std::initializer_list<std::size_t> digits) const {
    return state_index(std::span<const std::size_t>(digits.begin(),
                                                    digits.size()));
  }

  std::vector<std::size_t> state_of(std::size_t index) const {
    if (index >= num_states_) {
      throw LookupError("state index " + std::to_string(index) +
                        " out of range");
    }
    std::vector<std::size_t> digits(radices_.size());
    unpack_index(index, radices_, digits);
    return digits;
  }

  /// Observation index produced by a state: the projection of the
  /// state onto the observable variables.
  std::size_t observe(std::size_t state) const { return obs_of_state_[state]; }

  double reward(std::size_t state, std::size_t action) const {
    return reward_spec.by_action[action][reward_row_of_state_[state]];
  }

 private:
  std::size_t unchecked_variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].name == name) return i;
    }
    return variables.size();
  }

  bool finalized_ = false;
  std::vector<std::size_t> radices_;
  std::size_t num_states_ = 0;
  std::size_t num_observations_ = 0;
  std::vector<std::vector<ParentRef>> parent_refs_;
  std::vector<std::size_t> reward_vars_;
  std::vector<std::size_t> obs_vars_;
  std::vector<std::size_t> reward_row_of_state_;
  std::vector<std::size_t> obs_of_state_;

 public:
  friend bool operator==(const CausalPOMDP& a, const CausalPOMDP& b) {
    return a.variables == b.variables && a.actions == b.actions &&
           a.graph == b.graph && a.transition == b.transition &&
           a.reward_spec == b.reward_spec && a.observation == b.observation &&
           a.gamma == b.gamma;
  }
};

/// All full assignments in canonical order: assignment k is state k.
inline std::vector<std::vector<std::size_t>> enumerate_states(
    const CausalPOMDP& m) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(m.num_states());
  for (std::size_t s = 0; s < m.num_states(); ++s) out.push_back(m.state_of(s));
  return out;
}

/// Human-readable label of a state, e.g. "L,hl".
inline std::string state_label(const CausalPOMDP& m, std::size_t state) {
  std::vector<std::size_t> digits = m.state_of(state);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0) out += ',';
    out += m.variables[i].values[digits[i]];
  }
  return out;
}

/// Label of an observation: the observed variables' values joined with
/// commas in declared observable order. The empty projection has the
/// single label "".
inline std::string observation_label(const CausalPOMDP& m, std::size_t obs) {
  const auto& vars = m.observable_vars();
  std::vector<std::size_t> radices;
  radices.reserve(vars.size());
  for (std::size_t v : vars) radices.push_back(m.radices()[v]);
  std::vector<std::size_t> digits(vars.size());
  unpack_index(obs, radices, digits);
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i > 0) out += ',';
    out += m.variables[vars[i]].values[digits[i]];
  }
  return out;
}

inline std::size_t observation_index(const CausalPOMDP& m,
                                     std::string_view label) {
  for (std::size_t o = 0; o < m.num_observations(); ++o) {
    if (observation_label(m, o) == label) return o;
  }
  throw LookupError("unknown observation \"" + std::string(label) + "\"");
}

/// Transition tables for one domain: every variable's table pushed
/// through that domain's shift for the variable, if any.
struct ShiftedTransition {
  std::vector<std::vector<ConditionalTable>> tables;  // [variable][action]
};

inline ShiftedTransition shifted_transition(const CausalPOMDP& m,
                                            const DomainSpec& domain) {
  ShiftedTransition out;
  out.tables = m.transition.tables;
  for (const auto& [name, shift] : domain.shifts) {
    std::size_t var = m.variable_index(name);
    if (shift.size() != m.radices()[var]) {
      throw SizeError("shift for \"" + name + "\" has size " +
                      std::to_string(shift.size()) + ", expected " +
                      std::to_string(m.radices()[var]));
    }
    for (auto& table : out.tables[var]) table = shifted_cpt(table, shift);
  }
  return out;
}

namespace detail {

/// Fills row[s'] = P(s' | state, action) as the product of per-variable
/// conditionals, recursing over variables in declared order so each
/// within-slice parent is assigned before its children. Zero partial
/// products prune whole subtrees; `row` must be pre-zeroed.
inline void transition_row_impl(
    const CausalPOMDP& m,
    const std::vector<std::vector<ConditionalTable>>& tables,
    std::size_t state, std::size_t action, std::span<double> row) {
  std::size_t n = m.num_variables();
  std::vector<std::size_t> sdig(n), ndig(n);
  unpack_index(state, m.radices(), sdig);

  std::function<void(std::size_t, std::size_t, double)> rec =
      [&](std::size_t i, std::size_t packed, double prod) {
        if (i == n) {
          row[packed] = prod;
          return;
        }
        const ConditionalTable& t = tables[i][action];
        std::size_t r = 0;
        for (const auto& ref : m.parent_refs(i)) {
          std::size_t digit = ref.prev ? sdig[ref.var] : ndig[ref.var];
          r = r * m.radices()[ref.var] + digit;
        }
        const double* dist = t.row(r);
        for (std::size_t v = 0; v < t.arity; ++v) {
          if (dist[v] == 0.0) continue;
          ndig[i] = v;
          rec(i + 1, packed * m.radices()[i] + v, prod * dist[v]);
        }
      };
  rec(0, 0, 1.0);
}

}  // namespace detail

/// Full next-state distribution from `state` under `action` for the
/// given (possibly shifted) tables. `row` must have num_states()
/// entries; it is overwritten.
inline void transition_row(const CausalPOMDP& m, const ShiftedTransition& t,
                           std::size_t state, std::size_t action,
                           std::span<double> row) {
  std::fill(row.begin(), row.end(), 0.0);
  detail::transition_row_impl(m, t.tables, state, action, row);
}

inline void transition_row(const CausalPOMDP& m, std::size_t state,
                           std::size_t action, std::span<double> row) {
  std::fill(row.begin(), row.end(), 0.0);
  detail::transition_row_impl(m, m.transition.tables, state, action, row);
}

/// Single transition probability P(next | state, action) under the
/// given tables: the product of one conditional per variable.
inline double transition_prob(const CausalPOMDP& m,
                              const std::vector<std::vector<ConditionalTable>>&
                                  tables,
                              std::size_t state, std::size_t action,
                              std::size_t next) {
  std::size_t n = m.num_variables();
  std::vector<std::size_t> sdig(n), ndig(n);
  unpack_index(state, m.radices(), sdig);
  unpack_index(next, m.radices(), ndig);
  double prod = 1.0;
  for (std::size_t i = 0; i < n && prod != 0.0; ++i) {
    const ConditionalTable& t = tables[i][action];
    std::size_t r = 0;
    for (const auto& ref : m.parent_refs(i)) {
      std::size_t digit = ref.prev ? sdig[ref.var] : ndig[ref.var];
      r = r * m.radices()[ref.var] + digit;
    }
    prod *= t.at(r, ndig[i]);
  }
  return prod;
}

inline double transition_prob(const CausalPOMDP& m, std::size_t state,
                              std::size_t action, std::size_t next) {
  return transition_prob(m, m.transition.tables, state, action, next);
}

inline double transition_prob(const CausalPOMDP& m,
                              const ShiftedTransition& t, std::size_t state,
                              std::size_t action, std::size_t next) {
  return transition_prob(m, t.tables, state, action, next);
}

/// Whether two domains induce the same transition kernel on this model
/// within `tol`, entrywise over all (state, action, next) triples.
/// Distinct shift bundles can induce identical kernels; kernel
/// equality, not bundle equality, is what behavior can distinguish.
inline bool kernels_equal(const CausalPOMDP& m, const DomainSpec& a,
                          const DomainSpec& b, double tol = kArithTol) {
  ShiftedTransition ta = shifted_transition(m, a);
  ShiftedTransition tb = shifted_transition(m, b);
  std::size_t ns = m.num_states();
  std::vector<double> ra(ns), rb(ns);
  for (std::size_t act = 0; act < m.num_actions(); ++act) {
    for (std::size_t s = 0; s < ns; ++s) {
      transition_row(m, ta, s, act, ra);
      transition_row(m, tb, s, act, rb);
      for (std::size_t s2 = 0; s2 < ns; ++s2) {
        if (std::abs(ra[s2] - rb[s2]) > tol) return false;
      }
    }
  }
  return true;
}

namespace detail {

inline bool unique_strings(const std::vector<std::string>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (v[i] == v[j]) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks every declared invariant of the model specification and
/// returns one finding per violation; an empty report means valid.
/// Operates on the raw specification fields only, so it can be run
/// before finalize().
inline ValidationReport validate_model(const CausalPOMDP& m) {
  ValidationReport rep;
  std::size_t n = m.variables.size();

  if (n == 0) rep.add("variables", "non-empty", "model declares no variables");
  for (std::size_t i = 0; i < n; ++i) {
    const VariableSpec& v = m.variables[i];
    if (v.name.empty()) {
      rep.add("variables[" + std::to_string(i) + "].name", "non-empty",
              "variable name is empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (m.variables[j].name == v.name) {
        rep.add("variables[" + std::to_string(i) + "].name", "unique-name",
                "duplicate variable \"" + v.name + "\"");
      }
    }
    if (v.values.empty()) {
      rep.add("variables[" + std::to_string(i) + "].values", "non-empty",
              "variable \"" + v.name + "\" has no values");
    }
    if (!detail::unique_strings(v.values)) {
      rep.add("variables[" + std::to_string(i) + "].values", "unique-value",
              "variable \"" + v.name + "\" repeats a value label");
    }
  }

  if (m.actions.empty()) {
    rep.add("actions", "non-empty", "model declares no actions");
  }
  if (!detail::unique_strings(m.actions)) {
    rep.add("actions", "unique-name", "duplicate action name");
  }

  if (!(m.gamma >= 0.0 && m.gamma < 1.0)) {
    rep.add("gamma", "range",
            "gamma must lie in [0, 1), got " + std::to_string(m.gamma));
  }

  // State-space size must stay finite in practice.
  {
    std::size_t cap = std::numeric_limits<std::size_t>::max() / 2;
    std::size_t ns = 1;
    for (const VariableSpec& v : m.variables) {
      if (v.values.empty()) continue;
      if (ns > cap / v.values.size()) {
        rep.add("variables", "state-space-size",
                "joint state space overflows the index type");
        ns = 0;
        break;
      }
      ns *= v.values.size();
    }
  }

  auto var_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < n; ++i) {
      if (m.variables[i].name == name) return i;
    }
    return n;
  };

  if (m.graph.parents.size() != n) {
    rep.add("parents", "shape",
            "graph lists parents for " +
                std::to_string(m.graph.parents.size()) + " variables, expected " +
                std::to_string(n));
  }

  // Row counts for each variable's tables; 0 marks an unresolvable
  // parent list whose shape cannot be checked.
  std::vector<std::size_t> expected_rows(n, 0);
  for (std::size_t i = 0; i < n && i < m.graph.parents.size(); ++i) {
    const ParentSpec& ps = m.graph.parents[i];
    const std::string& child = m.variables[i].name;
    bool resolvable = true;
    std::size_t rows = 1;
    for (const std::string& p : ps.prev) {
      std::size_t pi = var_index(p);
      if (pi == n) {
        rep.add("parents." + child + ".prev", "unknown-variable",
                "unknown parent \"" + p + "\"");
        resolvable = false;
      } else {
        rows *= m.variables[pi].values.size();
      }
    }
    for (const std::string& p : ps.curr) {
      std::size_t pi = var_index(p);
      if (pi == n) {
        rep.add("parents." + child + ".curr", "unknown-variable",
                "unknown parent \"" + p + "\"");
        resolvable = false;
      } else {
        if (pi >= i) {
          rep.add("parents." + child + ".curr", "ordering",
                  "within-slice parent \"" + p +
                      "\" is not declared before \"" + child + "\"");
          resolvable = false;
        }
        rows *= m.variables[pi].values.size();
      }
    }
    // The same variable may appear in both slices (its previous and
    // current values are distinct parents); duplicates within one
    // slice collapse table rows and are rejected.
    if (!detail::unique_strings(ps.prev) || !detail::unique_strings(ps.curr)) {
      rep.add("parents." + child, "duplicate-parent",
              "variable \"" + child + "\" lists a parent twice in one slice");
    }
    if (resolvable) expected_rows[i] = rows;
  }

  if (m.transition.tables.size() != n) {
    rep.add("transition", "shape",
            "transition lists tables for " +
                std::to_string(m.transition.tables.size()) +
                " variables, expected " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n && i < m.transition.tables.size(); ++i) {
    const std::string& vname = m.variables[i].name;
    std::size_t arity = m.variables[i].values.size();
    const auto& per_action = m.transition.tables[i];
    if (per_action.size() != m.actions.size()) {
      rep.add("transition." + vname, "shape",
              "tables for " + std::to_string(per_action.size()) +
                  " actions, expected " + std::to_string(m.actions.size()));
      continue;
    }
    for (std::size_t a = 0; a < per_action.size(); ++a) {
      const ConditionalTable& t = per_action[a];
      std::string path = "transition." + vname + "." + m.actions[a];
      if (t.arity != arity) {
        rep.add(path, "shape",
                "rows of length " + std::to_string(t.arity) + ", expected " +
                    std::to_string(arity));
        continue;
      }
      if (expected_rows[i] != 0 && t.rows() != expected_rows[i]) {
        rep.add(path, "shape",
                std::to_string(t.rows()) + " rows, expected " +
                    std::to_string(expected_rows[i]) +
                    " (one per parent assignment)");
        continue;
      }
      for (std::size_t r = 0; r < t.rows(); ++r) {
        double sum = 0.0;
        bool in_range = true;
        for (std::size_t v = 0; v < t.arity; ++v) {
          double x = t.at(r, v);
          if (!(x >= 0.0 && x <= 1.0) || !std::isfinite(x)) in_range = false;
          sum += x;
        }
        if (!in_range) {
          rep.add(path + "[" + std::to_string(r) + "]", "range",
                  "entry outside [0, 1]");
        } else if (std::abs(sum - 1.0) > kInputTol) {
          rep.add(path + "[" + std::to_string(r) + "]", "normalization",
                  "row sums to " + std::to_string(sum));
        }
      }
    }
  }

  if (!detail::unique_strings(m.reward_spec.vars)) {
    rep.add("reward.vars", "duplicate", "reward lists a variable twice");
  }
  std::size_t reward_rows = 1;
  bool reward_resolvable = true;
  for (std::size_t j = 0; j < m.reward_spec.vars.size(); ++j) {
    std::size_t vi = var_index(m.reward_spec.vars[j]);
    if (vi == n) {
      rep.add("reward.vars[" + std::to_string(j) + "]", "unknown-variable",
              "unknown variable \"" + m.reward_spec.vars[j] + "\"");
      reward_resolvable = false;
    } else {
      reward_rows *= m.variables[vi].values.size();
    }
  }
  if (m.reward_spec.by_action.size() != m.actions.size()) {
    rep.add("reward.table", "shape",
            "entries for " + std::to_string(m.reward_spec.by_action.size()) +
                " actions, expected " + std::to_string(m.actions.size()));
  } else if (reward_resolvable) {
    for (std::size_t a = 0; a < m.actions.size(); ++a) {
      const auto& row = m.reward_spec.by_action[a];
      if (row.size() != reward_rows) {
        rep.add("reward.table." + m.actions[a], "shape",
                std::to_string(row.size()) + " entries, expected " +
                    std::to_string(reward_rows));
        continue;
      }
      for (double x : row) {
        if (!std::isfinite(x)) {
          rep.add("reward.table." + m.actions[a], "finite",
                  "reward entry is not finite");
          break;
        }
      }
    }
  }

  if (!detail::unique_strings(m.observation.vars)) {
    rep.add("observables", "duplicate", "observables list a variable twice");
  }
  for (std::size_t j = 0; j < m.observation.vars.size(); ++j) {
    if (var_index(m.observation.vars[j]) == n) {
      rep.add("observables[" + std::to_string(j) + "]", "unknown-variable",
              "observable \"" + m.observation.vars[j] +
                  "\" is not a state variable");
    }
  }

  return rep;
}

/// Findings for a list of declared domains against a model: names must
/// be unique and non-empty, shifted variables must exist, and each
/// matrix must be square of the variable's size with stochastic rows.
inline ValidationReport validate_domains(
    const CausalPOMDP& m, const std::vector<DomainSpec>& domains) {
  ValidationReport rep;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const DomainSpec& d = domains[i];
    std::string base = "domains[" + std::to_string(i) + "]";
    if (d.name.empty()) {
      rep.add(base + ".name", "non-empty", "domain name is empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (domains[j].name == d.name) {
        rep.add(base + ".name", "unique-name",
                "duplicate domain \"" + d.name + "\"");
      }
    }
    for (const auto& [var, shift] : d.shifts) {
      std::string path = base + ".shifts." + var;
      std::size_t vi = 0;
      try {
        vi = m.variable_index(var);
      } catch (const LookupError&) {
        rep.add(path, "unknown-variable",
                "shifted variable \"" + var + "\" is not a state variable");
        continue;
      }
      std::size_t arity = m.variables[vi].values.size();
      if (shift.size() != arity) {
        rep.add(path, "shape",
                "matrix of size " + std::to_string(shift.size()) +
                    ", expected " + std::to_string(arity));
        continue;
      }
      for (std::size_t r = 0; r < shift.size(); ++r) {
        double sum = 0.0;
        bool in_range = true;
        for (std::size_t c = 0; c < shift.size(); ++c) {
          double x = shift.at(r, c);
          if (!(x >= 0.0 && x <= 1.0) || !std::isfinite(x)) in_range = false;
          sum += x;
        }
        if (!in_range) {
          rep.add(path + "[" + std::to_string(r) + "]", "range",
                  "entry outside [0, 1]");
        } else if (std::abs(sum - 1.0) > kShiftRowTol) {
          rep.add(path + "[" + std::to_string(r) + "]", "normalization",
                  "row sums to " + std::to_string(sum));
        }
      }
    }
  }
  return rep;
}

}  // namespace cpomdp
