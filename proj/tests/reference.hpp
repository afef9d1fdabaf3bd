// Independent reference implementations used only by tests: a flat joint
// filter, a direct expectimax recursion, and a random instance generator.
// These recompute everything from the raw model tables with their own
// index arithmetic so they can cross-check the library.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cpomdp/model.hpp"
#include "cpomdp/shift.hpp"

namespace ref {

inline std::vector<std::size_t> digits_of(std::size_t index,
                                          const std::vector<std::size_t>& radices) {
  std::vector<std::size_t> d(radices.size());
  for (std::size_t i = radices.size(); i-- > 0;) {
    d[i] = index % radices[i];
    index /= radices[i];
  }
  return d;
}

inline std::size_t index_of(const std::vector<std::size_t>& digits,
                            const std::vector<std::size_t>& radices) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    idx = idx * radices[i] + digits[i];
  }
  return idx;
}

// Shifted per-factor row, recomputed from the raw tables.
inline std::vector<double> shifted_factor_row(const cpomdp::CausalPOMDP& m,
                                              const cpomdp::DomainSpec& domain,
                                              std::size_t action,
                                              std::size_t var,
                                              std::size_t row) {
  const cpomdp::ConditionalTable& cpt = m.transition.tables[var][action];
  std::size_t arity = cpt.arity;
  std::vector<double> p(arity);
  for (std::size_t v = 0; v < arity; ++v) p[v] = cpt.p[row * arity + v];
  auto it = domain.shifts.find(m.variables[var].name);
  if (it == domain.shifts.end()) return p;
  std::vector<double> q(arity, 0.0);
  for (std::size_t i = 0; i < arity; ++i) {
    for (std::size_t j = 0; j < arity; ++j) q[j] += p[i] * it->second.at(i, j);
  }
  return q;
}

// Full S x S joint transition matrix for one (action, domain).
inline std::vector<std::vector<double>> joint_matrix(
    const cpomdp::CausalPOMDP& m, const cpomdp::DomainSpec& domain,
    std::size_t action) {
  std::size_t S = m.num_states();
  std::vector<std::size_t> radices;
  for (const auto& v : m.variables) radices.push_back(v.values.size());
  std::vector<std::vector<double>> T(S, std::vector<double>(S, 0.0));
  for (std::size_t s = 0; s < S; ++s) {
    std::vector<std::size_t> prev = digits_of(s, radices);
    for (std::size_t s2 = 0; s2 < S; ++s2) {
      std::vector<std::size_t> cur = digits_of(s2, radices);
      double prob = 1.0;
      for (std::size_t i = 0; i < m.variables.size() && prob > 0.0; ++i) {
        const cpomdp::ParentSpec& ps = m.graph.parents[i];
        std::vector<std::size_t> pd;
        std::vector<std::size_t> pr;
        for (const std::string& name : ps.prev) {
          std::size_t k = m.variable_index(name);
          pd.push_back(prev[k]);
          pr.push_back(radices[k]);
        }
        for (const std::string& name : ps.curr) {
          std::size_t k = m.variable_index(name);
          pd.push_back(cur[k]);
          pr.push_back(radices[k]);
        }
        std::size_t row = index_of(pd, pr);
        std::vector<double> q = shifted_factor_row(m, domain, action, i, row);
        prob *= q[cur[i]];
      }
      T[s][s2] = prob;
    }
  }
  return T;
}

// Observation index of a state, recomputed by projecting onto the
// observable variables.
inline std::size_t observe(const cpomdp::CausalPOMDP& m, std::size_t s) {
  std::vector<std::size_t> radices;
  for (const auto& v : m.variables) radices.push_back(v.values.size());
  std::vector<std::size_t> d = digits_of(s, radices);
  std::vector<std::size_t> od;
  std::vector<std::size_t> orad;
  for (const std::string& name : m.observation.vars) {
    std::size_t k = m.variable_index(name);
    od.push_back(d[k]);
    orad.push_back(radices[k]);
  }
  return index_of(od, orad);
}

// Reward recomputed from the raw table.
inline double reward(const cpomdp::CausalPOMDP& m, std::size_t s,
                     std::size_t a) {
  std::vector<std::size_t> radices;
  for (const auto& v : m.variables) radices.push_back(v.values.size());
  std::vector<std::size_t> d = digits_of(s, radices);
  std::vector<std::size_t> rd;
  std::vector<std::size_t> rr;
  for (const std::string& name : m.reward_spec.vars) {
    std::size_t k = m.variable_index(name);
    rd.push_back(d[k]);
    rr.push_back(radices[k]);
  }
  return m.reward_spec.by_action[a][index_of(rd, rr)];
}

struct FlatFilter {
  const cpomdp::CausalPOMDP* m;
  cpomdp::DomainSet domains;
  // [a][d] -> S x S matrix.
  std::vector<std::vector<std::vector<std::vector<double>>>> T;

  FlatFilter(const cpomdp::CausalPOMDP& model, cpomdp::DomainSet doms)
      : m(&model), domains(std::move(doms)) {
    T.resize(model.actions.size());
    for (std::size_t a = 0; a < model.actions.size(); ++a) {
      for (std::size_t d = 0; d < domains.size(); ++d) {
        T[a].push_back(joint_matrix(model, domains[d], a));
      }
    }
  }

  // b is state-major, domain-minor, matching the library layout.
  std::vector<double> predict(const std::vector<double>& b,
                              std::size_t a) const {
    std::size_t S = m->num_states();
    std::size_t D = domains.size();
    std::vector<double> out(S * D, 0.0);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t s = 0; s < S; ++s) {
        double w = b[s * D + d];
        if (w == 0.0) continue;
        for (std::size_t s2 = 0; s2 < S; ++s2) {
          out[s2 * D + d] += w * T[a][d][s][s2];
        }
      }
    }
    return out;
  }

  // Returns the observation likelihood; posterior written into b.
  double update(std::vector<double>& b, std::size_t a,
                std::size_t obs) const {
    std::vector<double> pred = predict(b, a);
    std::size_t S = m->num_states();
    std::size_t D = domains.size();
    double like = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      bool keep = observe(*m, s) == obs;
      for (std::size_t d = 0; d < D; ++d) {
        double v = keep ? pred[s * D + d] : 0.0;
        pred[s * D + d] = v;
        like += v;
      }
    }
    if (like > 0.0) {
      for (double& v : pred) v /= like;
    }
    b = std::move(pred);
    return like;
  }
};

// Direct expectimax over joint beliefs, built on FlatFilter only.
inline double expectimax(const FlatFilter& f, const std::vector<double>& b,
                         std::size_t horizon) {
  const cpomdp::CausalPOMDP& m = *f.m;
  std::size_t S = m.num_states();
  std::size_t D = f.domains.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    double immediate = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double ms = 0.0;
      for (std::size_t d = 0; d < D; ++d) ms += b[s * D + d];
      immediate += ms * reward(m, s, a);
    }
    double future = 0.0;
    if (horizon > 0) {
      std::vector<double> pred = f.predict(b, a);
      for (std::size_t o = 0; o < m.num_observations(); ++o) {
        double like = 0.0;
        std::vector<double> post(S * D, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
          if (observe(m, s) != o) continue;
          for (std::size_t d = 0; d < D; ++d) {
            post[s * D + d] = pred[s * D + d];
            like += pred[s * D + d];
          }
        }
        if (like <= 0.0) continue;
        for (double& v : post) v /= like;
        future += like * expectimax(f, post, horizon - 1);
      }
    }
    best = std::max(best, immediate + m.gamma * future);
  }
  return best;
}

// Standard alpha-vector value iteration on the flat joint space: full
// per-action cross-sums, duplicates removed, dominance pruned only at
// the end of each stage. Independent of the library's incremental
// backup; usable as the classic single-domain POMDP reference.
inline std::vector<std::vector<std::vector<double>>> vi_stages(
    const FlatFilter& f, std::size_t horizon) {
  const cpomdp::CausalPOMDP& m = *f.m;
  std::size_t S = m.num_states();
  std::size_t D = f.domains.size();
  std::size_t O = m.num_observations();
  std::size_t A = m.actions.size();

  auto dedupe_and_prune = [](std::vector<std::vector<double>> set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    std::vector<std::vector<double>> kept;
    for (std::size_t i = 0; i < set.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < set.size() && !dominated; ++j) {
        if (i == j) continue;
        bool le = true, lt = false;
        for (std::size_t k = 0; k < set[i].size(); ++k) {
          if (set[i][k] > set[j][k]) {
            le = false;
            break;
          }
          if (set[i][k] < set[j][k]) lt = true;
        }
        if (le && lt) dominated = true;
      }
      if (!dominated) kept.push_back(set[i]);
    }
    return kept;
  };

  std::vector<std::vector<std::vector<double>>> stages;
  std::vector<std::vector<double>> stage0;
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<double> alpha(S * D);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t d = 0; d < D; ++d) alpha[s * D + d] = reward(m, s, a);
    }
    stage0.push_back(std::move(alpha));
  }
  stages.push_back(dedupe_and_prune(std::move(stage0)));

  for (std::size_t n = 1; n <= horizon; ++n) {
    const auto& prev = stages.back();
    std::vector<std::vector<double>> next;
    for (std::size_t a = 0; a < A; ++a) {
      // G[o][j](s,d) = sum_{s': obs(s')=o} T_d(s'|s,a) prev[j](s',d)
      std::vector<std::vector<std::vector<double>>> G(
          O, std::vector<std::vector<double>>(
                 prev.size(), std::vector<double>(S * D, 0.0)));
      for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t j = 0; j < prev.size(); ++j) {
          for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t d = 0; d < D; ++d) {
              double acc = 0.0;
              for (std::size_t s2 = 0; s2 < S; ++s2) {
                if (observe(m, s2) != o) continue;
                acc += f.T[a][d][s][s2] * prev[j][s2 * D + d];
              }
              G[o][j][s * D + d] = acc;
            }
          }
        }
      }
      // Full cross-sum over observation choices.
      std::vector<std::size_t> choice(O, 0);
      while (true) {
        std::vector<double> alpha(S * D);
        for (std::size_t s = 0; s < S; ++s) {
          for (std::size_t d = 0; d < D; ++d) {
            double acc = 0.0;
            for (std::size_t o = 0; o < O; ++o) {
              acc += G[o][choice[o]][s * D + d];
            }
            alpha[s * D + d] = reward(m, s, a) + m.gamma * acc;
          }
        }
        next.push_back(std::move(alpha));
        std::size_t k = 0;
        while (k < O && ++choice[k] == prev.size()) choice[k++] = 0;
        if (k == O) break;
      }
    }
    stages.push_back(dedupe_and_prune(std::move(next)));
  }
  return stages;
}

inline double vi_value(const std::vector<std::vector<double>>& stage,
                       const std::vector<double>& b) {
  double best = -std::numeric_limits<double>::infinity();
  for (const std::vector<double>& alpha : stage) {
    double dot = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) dot += alpha[i] * b[i];
    best = std::max(best, dot);
  }
  return best;
}

// Random row-stochastic vector.
inline std::vector<double> random_simplex(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - u(g));
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

struct RandomInstance {
  cpomdp::CausalPOMDP model;
  cpomdp::DomainSet domains{{cpomdp::DomainSpec{"identity", {}}}};
};

// Small random factored model: |S| <= 8, <= 3 actions, <= 3 domains.
inline RandomInstance random_instance(
    std::mt19937_64& g, bool force_observable = false,
    std::size_t max_observations = std::size_t(-1)) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomInstance inst;
  cpomdp::CausalPOMDP& m = inst.model;

  std::size_t n_vars = 1 + std::uniform_int_distribution<int>(0, 2)(g);
  std::size_t states = 1;
  for (std::size_t i = 0; i < n_vars; ++i) {
    std::size_t arity = (states * 3 <= 8 && coin(g)) ? 3 : 2;
    if (states * arity > 8) arity = 2;
    if (states * arity > 8) break;
    states *= arity;
    cpomdp::VariableSpec v;
    v.name = "v" + std::to_string(i);
    for (std::size_t k = 0; k < arity; ++k) {
      v.values.push_back(v.name + "_" + std::to_string(k));
    }
    m.variables.push_back(std::move(v));
  }
  n_vars = m.variables.size();

  std::size_t n_actions = 1 + std::uniform_int_distribution<int>(0, 2)(g);
  for (std::size_t a = 0; a < n_actions; ++a) {
    m.actions.push_back("a" + std::to_string(a));
  }

  m.graph.parents.resize(n_vars);
  for (std::size_t i = 0; i < n_vars; ++i) {
    for (std::size_t k = 0; k < n_vars; ++k) {
      if (coin(g)) m.graph.parents[i].prev.push_back(m.variables[k].name);
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (u(g) < 0.3) m.graph.parents[i].curr.push_back(m.variables[k].name);
    }
  }

  m.transition.tables.resize(n_vars);
  for (std::size_t i = 0; i < n_vars; ++i) {
    std::size_t arity = m.variables[i].values.size();
    std::size_t rows = 1;
    for (const std::string& p : m.graph.parents[i].prev) {
      rows *= m.variables[m.variable_index(p)].values.size();
    }
    for (const std::string& p : m.graph.parents[i].curr) {
      rows *= m.variables[m.variable_index(p)].values.size();
    }
    for (std::size_t a = 0; a < n_actions; ++a) {
      cpomdp::ConditionalTable t;
      t.arity = arity;
      for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row;
        if (u(g) < 0.25) {
          row.assign(arity, 0.0);
          row[std::uniform_int_distribution<std::size_t>(0, arity - 1)(g)] =
              1.0;
        } else {
          row = random_simplex(g, arity);
        }
        t.p.insert(t.p.end(), row.begin(), row.end());
      }
      m.transition.tables[i].push_back(std::move(t));
    }
  }

  for (std::size_t i = 0; i < n_vars; ++i) {
    if (coin(g)) m.reward_spec.vars.push_back(m.variables[i].name);
  }
  std::size_t reward_rows = 1;
  for (const std::string& name : m.reward_spec.vars) {
    reward_rows *= m.variables[m.variable_index(name)].values.size();
  }
  for (std::size_t a = 0; a < n_actions; ++a) {
    std::vector<double> table(reward_rows);
    for (double& r : table) r = 10.0 * u(g) - 5.0;
    m.reward_spec.by_action.push_back(std::move(table));
  }

  for (std::size_t i = 0; i < n_vars; ++i) {
    if (coin(g)) m.observation.vars.push_back(m.variables[i].name);
  }
  auto obs_count = [&m]() {
    std::size_t n = 1;
    for (const std::string& name : m.observation.vars) {
      n *= m.variables[m.variable_index(name)].values.size();
    }
    return n;
  };
  while (obs_count() > max_observations) m.observation.vars.pop_back();
  if (force_observable && m.observation.vars.empty()) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < n_vars; ++i) {
      if (m.variables[i].values.size() < m.variables[pick].values.size()) {
        pick = i;
      }
    }
    m.observation.vars.push_back(m.variables[pick].name);
  }

  m.gamma = 0.9;
  m.finalize();

  std::size_t extra = std::uniform_int_distribution<int>(0, 2)(g);
  std::vector<cpomdp::DomainSpec> specs{cpomdp::DomainSpec{"identity", {}}};
  for (std::size_t d = 0; d < extra; ++d) {
    cpomdp::DomainSpec spec;
    spec.name = "shift" + std::to_string(d);
    for (std::size_t i = 0; i < n_vars; ++i) {
      if (!coin(g)) continue;
      std::size_t arity = m.variables[i].values.size();
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < arity; ++r) {
        if (u(g) < 0.3) {
          std::vector<double> hot(arity, 0.0);
          hot[std::uniform_int_distribution<std::size_t>(0, arity - 1)(g)] =
              1.0;
          rows.push_back(std::move(hot));
        } else {
          rows.push_back(random_simplex(g, arity));
        }
      }
      spec.shifts.emplace(m.variables[i].name,
                          cpomdp::ShiftMatrix::from_rows(rows));
    }
    specs.push_back(std::move(spec));
  }
  inst.domains = cpomdp::DomainSet(specs);
  return inst;
}

inline std::vector<double> random_joint_belief(std::mt19937_64& g,
                                               std::size_t S, std::size_t D) {
  return random_simplex(g, S * D);
}

}  // namespace ref
