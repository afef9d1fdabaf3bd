#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpomdp/belief.hpp"
#include "cpomdp/core.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/planning.hpp"
#include "cpomdp/shift.hpp"
#include "cpomdp/sim.hpp"

namespace cpomdp {

// Output documents use insertion-ordered objects so rendering is
// deterministic and follows declaration order.
using ojson = nlohmann::ordered_json;
using ijson = nlohmann::json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\" for reading");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("error while reading \"" + path + "\"");
  return out.str();
}

/// Writes via a temporary file in the same directory plus an atomic
/// rename, so readers never observe a partial file.
inline void write_text_file_atomic(const std::string& path,
                                   std::string_view content) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open \"" + tmp.string() + "\" for writing");
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) throw IoError("error while writing \"" + tmp.string() + "\"");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    throw IoError("cannot rename \"" + tmp.string() + "\" to \"" + path +
                  "\": " + ec.message());
  }
}

/// Content hash stamped into run manifests: FNV-1a over the raw bytes.
inline std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline ijson parse_json(const std::string& text, const std::string& what) {
  try {
    return ijson::parse(text);
  } catch (const ijson::parse_error& e) {
    throw ParseError(what + ": invalid JSON: " + e.what());
  }
}

inline const ijson& require(const ijson& obj, const char* key,
                            const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(path + ": missing required key \"" + key + "\"");
  }
  return obj.at(key);
}

inline std::string as_string(const ijson& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path + ": expected a string");
  return j.get<std::string>();
}

inline double as_number(const ijson& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline const ijson& as_array(const ijson& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected a list");
  return j;
}

inline const ijson& as_object(const ijson& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  return j;
}

inline std::vector<std::string> string_list(const ijson& j,
                                            const std::string& path) {
  as_array(j, path);
  std::vector<std::string> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<double> number_list(const ijson& j,
                                       const std::string& path) {
  as_array(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

/// Rescales a near-normalized probability vector to sum to exactly 1,
/// iterating the division so a reloaded render is a fixed point.
/// Returns true if anything changed. Vectors outside the tolerance are
/// left for validation to report.
inline bool canonicalize_distribution(std::span<double> p) {
  double sum = 0.0;
  for (double x : p) sum += x;
  if (sum == 1.0 || std::abs(sum - 1.0) > kInputTol || !(sum > 0.0)) {
    return false;
  }
  for (int pass = 0; pass < 5 && sum != 1.0; ++pass) {
    for (double& x : p) x /= sum;
    double prev = sum;
    sum = 0.0;
    for (double x : p) sum += x;
    if (sum == prev) break;
  }
  return true;
}

}  // namespace detail

/// A model file's content: the model itself plus any domains the file
/// declares, plus notes about probability rows that were renormalized
/// on input.
struct LoadedModel {
  CausalPOMDP model;
  std::vector<DomainSpec> domains;
  std::vector<std::string> adjustments;
};

/// Parses the model schema without validating invariants or resolving
/// indices; rows within the input tolerance are renormalized exactly
/// and noted. Callers run validate_model/validate_domains on the
/// result and then finalize().
inline LoadedModel parse_model_text(const std::string& text) {
  ijson j = detail::parse_json(text, "model");
  detail::as_object(j, "model");
  LoadedModel out;
  CausalPOMDP& m = out.model;

  const ijson& vars = detail::as_array(detail::require(j, "variables", "model"),
                                       "variables");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    std::string path = "variables[" + std::to_string(i) + "]";
    const ijson& v = detail::as_object(vars[i], path);
    VariableSpec spec;
    spec.name = detail::as_string(detail::require(v, "name", path), path + ".name");
    spec.values = detail::string_list(detail::require(v, "values", path),
                                      path + ".values");
    m.variables.push_back(std::move(spec));
  }

  m.actions = detail::string_list(detail::require(j, "actions", "model"),
                                  "actions");

  const ijson& parents = detail::as_object(
      detail::require(j, "parents", "model"), "parents");
  m.graph.parents.resize(m.variables.size());
  for (const auto& [name, entry] : parents.items()) {
    std::string path = "parents." + name;
    std::size_t vi = m.variables.size();
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
      if (m.variables[i].name == name) vi = i;
    }
    if (vi == m.variables.size()) {
      throw ParseError(path + ": unknown variable \"" + name + "\"");
    }
    const ijson& e = detail::as_object(entry, path);
    ParentSpec ps;
    ps.prev = detail::string_list(detail::require(e, "prev", path),
                                  path + ".prev");
    ps.curr = detail::string_list(detail::require(e, "curr", path),
                                  path + ".curr");
    m.graph.parents[vi] = std::move(ps);
  }

  const ijson& transition = detail::as_object(
      detail::require(j, "transition", "model"), "transition");
  m.transition.tables.resize(m.variables.size());
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    const std::string& vname = m.variables[i].name;
    std::string vpath = "transition." + vname;
    if (!transition.contains(vname)) {
      throw ParseError(vpath + ": missing transition tables");
    }
    const ijson& per_action = detail::as_object(transition.at(vname), vpath);
    m.transition.tables[i].resize(m.actions.size());
    for (std::size_t a = 0; a < m.actions.size(); ++a) {
      std::string apath = vpath + "." + m.actions[a];
      if (!per_action.contains(m.actions[a])) {
        throw ParseError(apath + ": missing table");
      }
      const ijson& rows = detail::as_array(per_action.at(m.actions[a]), apath);
      ConditionalTable table;
      table.arity = m.variables[i].values.size();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string rpath = apath + "[" + std::to_string(r) + "]";
        std::vector<double> row = detail::number_list(rows[r], rpath);
        if (row.size() != table.arity) {
          throw ParseError(rpath + ": row of length " +
                           std::to_string(row.size()) + ", expected " +
                           std::to_string(table.arity));
        }
        if (detail::canonicalize_distribution(row)) {
          out.adjustments.push_back(rpath + ": renormalized");
        }
        table.p.insert(table.p.end(), row.begin(), row.end());
      }
      m.transition.tables[i][a] = std::move(table);
    }
  }
  for (const auto& [name, unused] : transition.items()) {
    bool known = false;
    for (const VariableSpec& v : m.variables) known |= v.name == name;
    if (!known) {
      throw ParseError("transition." + name + ": unknown variable");
    }
  }

  const ijson& reward = detail::as_object(detail::require(j, "reward", "model"),
                                          "reward");
  m.reward_spec.vars = detail::string_list(
      detail::require(reward, "vars", "reward"), "reward.vars");
  const ijson& rtable = detail::as_object(
      detail::require(reward, "table", "reward"), "reward.table");
  m.reward_spec.by_action.resize(m.actions.size());
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    std::string apath = "reward.table." + m.actions[a];
    if (!rtable.contains(m.actions[a])) {
      throw ParseError(apath + ": missing entries");
    }
    m.reward_spec.by_action[a] = detail::number_list(rtable.at(m.actions[a]),
                                                     apath);
  }
  for (const auto& [name, unused] : rtable.items()) {
    bool known = false;
    for (const std::string& a : m.actions) known |= a == name;
    if (!known) throw ParseError("reward.table." + name + ": unknown action");
  }

  m.observation.vars = detail::string_list(
      detail::require(j, "observables", "model"), "observables");
  m.gamma = detail::as_number(detail::require(j, "gamma", "model"), "gamma");

  if (j.contains("domains")) {
    const ijson& domains = detail::as_array(j.at("domains"), "domains");
    for (std::size_t i = 0; i < domains.size(); ++i) {
      std::string dpath = "domains[" + std::to_string(i) + "]";
      const ijson& d = detail::as_object(domains[i], dpath);
      DomainSpec spec;
      spec.name = detail::as_string(detail::require(d, "name", dpath),
                                    dpath + ".name");
      const ijson& shifts = detail::as_object(
          detail::require(d, "shifts", dpath), dpath + ".shifts");
      for (const auto& [var, rows_json] : shifts.items()) {
        std::string spath = dpath + ".shifts." + var;
        const ijson& rows = detail::as_array(rows_json, spath);
        std::vector<double> flat;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          std::vector<double> row = detail::number_list(
              rows[r], spath + "[" + std::to_string(r) + "]");
          if (row.size() != rows.size()) {
            throw ParseError(spath + "[" + std::to_string(r) +
                             "]: row of length " + std::to_string(row.size()) +
                             ", expected " + std::to_string(rows.size()) +
                             " (square matrix)");
          }
          flat.insert(flat.end(), row.begin(), row.end());
        }
        if (rows.empty()) throw ParseError(spath + ": empty matrix");
        spec.shifts.emplace(var,
                            ShiftMatrix::unchecked(rows.size(), std::move(flat)));
      }
      out.domains.push_back(std::move(spec));
    }
  }

  return out;
}

/// Parse + validate + finalize; the one-call loader.
inline LoadedModel load_model_text(const std::string& text) {
  LoadedModel loaded = parse_model_text(text);
  ValidationReport rep = validate_model(loaded.model);
  ValidationReport drep = validate_domains(loaded.model, loaded.domains);
  rep.findings.insert(rep.findings.end(), drep.findings.begin(),
                      drep.findings.end());
  if (!rep.ok()) {
    const ValidationFinding& f = rep.findings.front();
    throw ValidationError(
        "invalid model: " + f.path + ": " + f.detail +
        (rep.findings.size() > 1
             ? " (and " + std::to_string(rep.findings.size() - 1) +
                   " more findings)"
             : ""));
  }
  loaded.model.finalize();
  return loaded;
}

inline LoadedModel load_model_file(const std::string& path) {
  return load_model_text(read_text_file(path));
}

inline std::string render_model(const CausalPOMDP& m,
                                const std::vector<DomainSpec>& domains) {
  ojson j;
  j["variables"] = ojson::array();
  for (const VariableSpec& v : m.variables) {
    j["variables"].push_back({{"name", v.name}, {"values", v.values}});
  }
  j["actions"] = m.actions;
  ojson parents = ojson::object();
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    parents[m.variables[i].name] = {{"prev", m.graph.parents[i].prev},
                                    {"curr", m.graph.parents[i].curr}};
  }
  j["parents"] = std::move(parents);
  ojson transition = ojson::object();
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    ojson per_action = ojson::object();
    for (std::size_t a = 0; a < m.actions.size(); ++a) {
      const ConditionalTable& t = m.transition.tables[i][a];
      ojson rows = ojson::array();
      for (std::size_t r = 0; r < t.rows(); ++r) {
        rows.push_back(std::vector<double>(t.row(r), t.row(r) + t.arity));
      }
      per_action[m.actions[a]] = std::move(rows);
    }
    transition[m.variables[i].name] = std::move(per_action);
  }
  j["transition"] = std::move(transition);
  ojson rtable = ojson::object();
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    rtable[m.actions[a]] = m.reward_spec.by_action[a];
  }
  j["reward"] = {{"vars", m.reward_spec.vars}, {"table", std::move(rtable)}};
  j["observables"] = m.observation.vars;
  j["gamma"] = m.gamma;
  if (!domains.empty()) {
    ojson ds = ojson::array();
    for (const DomainSpec& d : domains) {
      ojson shifts = ojson::object();
      for (const auto& [var, a] : d.shifts) {
        ojson rows = ojson::array();
        for (std::size_t r = 0; r < a.size(); ++r) {
          rows.push_back(std::vector<double>(a.row(r), a.row(r) + a.size()));
        }
        shifts[var] = std::move(rows);
      }
      ds.push_back({{"name", d.name}, {"shifts", std::move(shifts)}});
    }
    j["domains"] = std::move(ds);
  }
  return j.dump(2) + "\n";
}

/// The unintervened environment, used when a model declares no domains.
inline DomainSpec identity_domain() { return DomainSpec{"identity", {}}; }

/// Resolves a --domains selector ("all" or a comma-separated name
/// list) against a model file's declared domains; a model with no
/// declared domains gets the implicit identity domain.
inline DomainSet select_domains(const LoadedModel& loaded,
                                const std::string& selector) {
  std::vector<DomainSpec> declared = loaded.domains;
  if (declared.empty()) declared.push_back(identity_domain());
  if (selector == "all") return DomainSet(declared);
  std::vector<DomainSpec> chosen;
  std::size_t start = 0;
  while (start <= selector.size()) {
    std::size_t comma = selector.find(',', start);
    std::string name = selector.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (name.empty()) throw LookupError("empty domain name in selector");
    bool found = false;
    for (const DomainSpec& d : declared) {
      if (d.name == name) {
        chosen.push_back(d);
        found = true;
        break;
      }
    }
    if (!found) throw LookupError("unknown domain \"" + name + "\"");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return DomainSet(chosen);
}

inline std::vector<TraceStep> parse_trace_text(const std::string& text,
                                               const CausalPOMDP& m) {
  ijson j = detail::parse_json(text, "trace");
  detail::as_array(j, "trace");
  std::vector<TraceStep> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string path = "trace[" + std::to_string(i) + "]";
    const ijson& e = detail::as_object(j[i], path);
    TraceStep step;
    step.action = m.action_index(
        detail::as_string(detail::require(e, "action", path), path + ".action"));
    const ijson& obs = detail::as_object(
        detail::require(e, "observation", path), path + ".observation");
    std::size_t packed = 0;
    for (std::size_t v : m.observable_vars()) {
      const std::string& vname = m.variables[v].name;
      if (!obs.contains(vname)) {
        throw ParseError(path + ".observation: missing value for \"" + vname +
                         "\"");
      }
      std::string label = detail::as_string(obs.at(vname),
                                            path + ".observation." + vname);
      packed = packed * m.radices()[v] + m.value_index(v, label);
    }
    if (obs.size() != m.observable_vars().size()) {
      throw ParseError(path +
                       ".observation: keys must be exactly the observables");
    }
    step.observation = packed;
    out.push_back(step);
  }
  return out;
}

inline ojson belief_to_json(const JointBelief& b) {
  ojson rows = ojson::array();
  for (std::size_t s = 0; s < b.num_states(); ++s) {
    std::vector<double> row(b.num_domains());
    for (std::size_t d = 0; d < b.num_domains(); ++d) row[d] = b.at(s, d);
    rows.push_back(row);
  }
  return rows;
}

inline JointBelief belief_from_json(const ijson& j, std::size_t num_states,
                                    std::size_t num_domains,
                                    const std::string& path) {
  detail::as_array(j, path);
  if (j.size() != num_states) {
    throw ParseError(path + ": " + std::to_string(j.size()) +
                     " state rows, expected " + std::to_string(num_states));
  }
  std::vector<double> p;
  p.reserve(num_states * num_domains);
  for (std::size_t s = 0; s < num_states; ++s) {
    std::vector<double> row = detail::number_list(
        j[s], path + "[" + std::to_string(s) + "]");
    if (row.size() != num_domains) {
      throw ParseError(path + "[" + std::to_string(s) + "]: row of length " +
                       std::to_string(row.size()) + ", expected " +
                       std::to_string(num_domains));
    }
    p.insert(p.end(), row.begin(), row.end());
  }
  detail::canonicalize_distribution(p);
  try {
    return JointBelief(num_states, num_domains, std::move(p));
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::vector<JointBelief> parse_beliefs_text(const std::string& text,
                                                   std::size_t num_states,
                                                   std::size_t num_domains) {
  ijson j = detail::parse_json(text, "beliefs");
  detail::as_array(j, "beliefs");
  std::vector<JointBelief> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(belief_from_json(j[i], num_states, num_domains,
                                   "beliefs[" + std::to_string(i) + "]"));
  }
  return out;
}

/// Filter output: one entry per belief, step k being the belief after
/// the first k trace steps (step 0 is the prior).
inline std::string render_filter_output(const std::vector<JointBelief>& bs) {
  ojson j = ojson::array();
  for (std::size_t k = 0; k < bs.size(); ++k) {
    ojson entry;
    entry["step"] = k;
    entry["belief"] = belief_to_json(bs[k]);
    entry["state_marginal"] = bs[k].marginal_state();
    entry["domain_marginal"] = bs[k].marginal_domain();
    j.push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

inline ojson alpha_set_to_json(const CausalPOMDP& m, const AlphaSet& set,
                               std::size_t num_domains) {
  ojson j;
  j["stage"] = set.stage;
  ojson alphas = ojson::array();
  for (const AlphaFunction& alpha : set.alphas) {
    ojson entry;
    entry["action"] = m.actions[alpha.action];
    ojson rows = ojson::array();
    std::size_t ns = alpha.values.size() / num_domains;
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<double> row(alpha.values.begin() +
                                  std::ptrdiff_t(s * num_domains),
                              alpha.values.begin() +
                                  std::ptrdiff_t((s + 1) * num_domains));
      rows.push_back(std::move(row));
    }
    entry["values"] = std::move(rows);
    if (!alpha.successors.empty()) {
      ojson succ = ojson::object();
      for (std::size_t o = 0; o < alpha.successors.size(); ++o) {
        succ[observation_label(m, o)] = alpha.successors[o];
      }
      entry["successors"] = std::move(succ);
    }
    alphas.push_back(std::move(entry));
  }
  j["alphas"] = std::move(alphas);
  return j;
}

inline std::string render_alpha_set(const CausalPOMDP& m, const AlphaSet& set,
                                    std::size_t num_domains) {
  return alpha_set_to_json(m, set, num_domains).dump(2) + "\n";
}

/// Every stage of a plan in one file, for stage-matched greedy
/// execution: {"stages": [<alpha set>, ...]} in ascending stage order.
inline std::string render_alpha_stages(const CausalPOMDP& m,
                                       const std::vector<AlphaSet>& stages,
                                       std::size_t num_domains) {
  ojson j;
  j["stages"] = ojson::array();
  for (const AlphaSet& set : stages) {
    j["stages"].push_back(alpha_set_to_json(m, set, num_domains));
  }
  return j.dump(2) + "\n";
}

inline AlphaSet alpha_set_from_json(const ijson& j, const CausalPOMDP& m,
                                    std::size_t num_domains,
                                    const std::string& path) {
  detail::as_object(j, path);
  AlphaSet set;
  double stage = detail::as_number(detail::require(j, "stage", path),
                                   path + ".stage");
  set.stage = int(stage);
  const ijson& alphas = detail::as_array(detail::require(j, "alphas", path),
                                         path + ".alphas");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    std::string apath = path + ".alphas[" + std::to_string(i) + "]";
    const ijson& e = detail::as_object(alphas[i], apath);
    AlphaFunction alpha;
    alpha.action = m.action_index(detail::as_string(
        detail::require(e, "action", apath), apath + ".action"));
    const ijson& rows = detail::as_array(detail::require(e, "values", apath),
                                         apath + ".values");
    if (rows.size() != m.num_states()) {
      throw ParseError(apath + ".values: " + std::to_string(rows.size()) +
                       " state rows, expected " +
                       std::to_string(m.num_states()));
    }
    for (std::size_t s = 0; s < rows.size(); ++s) {
      std::vector<double> row = detail::number_list(
          rows[s], apath + ".values[" + std::to_string(s) + "]");
      if (row.size() != num_domains) {
        throw ParseError(apath + ".values[" + std::to_string(s) +
                         "]: row of length " + std::to_string(row.size()) +
                         ", expected " + std::to_string(num_domains));
      }
      alpha.values.insert(alpha.values.end(), row.begin(), row.end());
    }
    if (e.contains("successors")) {
      const ijson& succ = detail::as_object(e.at("successors"),
                                            apath + ".successors");
      alpha.successors.assign(m.num_observations(), -1);
      for (const auto& [label, idx] : succ.items()) {
        std::size_t o = observation_index(m, label);
        if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0) {
          throw ParseError(apath + ".successors." + label +
                           ": expected a non-negative integer");
        }
        alpha.successors[o] = idx.get<std::int64_t>();
      }
      for (std::size_t o = 0; o < alpha.successors.size(); ++o) {
        if (alpha.successors[o] < 0) {
          throw ParseError(apath + ".successors: missing observation \"" +
                           observation_label(m, o) + "\"");
        }
      }
    }
    set.alphas.push_back(std::move(alpha));
  }
  if (set.alphas.empty()) {
    throw ValidationError(path + ": alpha set is empty");
  }
  return set;
}

/// Accepts either a single alpha-set document or {"stages": [...]};
/// returns stages in ascending stage order.
inline std::vector<AlphaSet> parse_alpha_stages_text(const std::string& text,
                                                     const CausalPOMDP& m,
                                                     std::size_t num_domains) {
  ijson j = detail::parse_json(text, "alphas");
  std::vector<AlphaSet> stages;
  if (j.is_object() && j.contains("stages")) {
    const ijson& list = detail::as_array(j.at("stages"), "stages");
    for (std::size_t i = 0; i < list.size(); ++i) {
      stages.push_back(alpha_set_from_json(
          list[i], m, num_domains, "stages[" + std::to_string(i) + "]"));
    }
  } else {
    stages.push_back(alpha_set_from_json(j, m, num_domains, "alphas"));
  }
  if (stages.empty()) throw ValidationError("alphas: no stages");
  std::sort(stages.begin(), stages.end(),
            [](const AlphaSet& a, const AlphaSet& b) { return a.stage < b.stage; });
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i].stage == stages[i - 1].stage) {
      throw ValidationError("alphas: duplicate stage " +
                            std::to_string(stages[i].stage));
    }
    // Successor indices must address the previous stage's set.
    for (const AlphaFunction& alpha : stages[i].alphas) {
      for (std::int64_t s : alpha.successors) {
        if (s >= std::int64_t(stages[i - 1].alphas.size())) {
          throw ValidationError("alphas: successor index " +
                                std::to_string(s) +
                                " out of range for stage " +
                                std::to_string(stages[i - 1].stage));
        }
      }
    }
  }
  return stages;
}

/// Policy file: {"kind":"reactive","initial":...,"map":{...}} or
/// {"kind":"greedy","alphas":path}. Greedy alphas paths resolve
/// relative to the policy file's directory; the agent tracks the model
/// file's declared domains (or the implicit identity domain) with a
/// uniform prior.
inline PolicySpec load_policy_file(const std::string& path,
                                   const CausalPOMDP& m,
                                   const std::vector<DomainSpec>& declared) {
  ijson j = detail::parse_json(read_text_file(path), "policy");
  detail::as_object(j, "policy");
  std::string kind = detail::as_string(detail::require(j, "kind", "policy"),
                                       "policy.kind");
  PolicySpec spec;
  if (kind == "reactive") {
    ReactivePolicy r;
    r.initial_action = m.action_index(detail::as_string(
        detail::require(j, "initial", "policy"), "policy.initial"));
    const ijson& map = detail::as_object(detail::require(j, "map", "policy"),
                                         "policy.map");
    r.by_observation.assign(m.num_observations(), m.num_actions());
    for (const auto& [label, action] : map.items()) {
      r.by_observation[observation_index(m, label)] =
          m.action_index(detail::as_string(action, "policy.map." + label));
    }
    for (std::size_t o = 0; o < r.by_observation.size(); ++o) {
      if (r.by_observation[o] == m.num_actions()) {
        throw ValidationError("policy.map: missing observation \"" +
                              observation_label(m, o) + "\"");
      }
    }
    spec.policy = std::move(r);
  } else if (kind == "greedy") {
    std::string rel = detail::as_string(
        detail::require(j, "alphas", "policy"), "policy.alphas");
    std::filesystem::path alpha_path(rel);
    if (alpha_path.is_relative()) {
      alpha_path = std::filesystem::path(path).parent_path() / alpha_path;
    }
    GreedyPolicy g;
    std::vector<DomainSpec> ds = declared;
    if (ds.empty()) ds.push_back(identity_domain());
    g.domains = DomainSet(ds);
    g.domain_prior.assign(ds.size(), 1.0 / double(ds.size()));
    g.stages = parse_alpha_stages_text(read_text_file(alpha_path.string()), m,
                                       ds.size());
    spec.policy = std::move(g);
  } else {
    throw ParseError("policy.kind: expected \"reactive\" or \"greedy\", got \"" +
                     kind + "\"");
  }
  return spec;
}

inline std::string render_validation_report(const ValidationReport& rep) {
  ojson j = ojson::array();
  for (const ValidationFinding& f : rep.findings) {
    j.push_back({{"path", f.path}, {"rule", f.rule}, {"detail", f.detail}});
  }
  return j.dump(2) + "\n";
}

inline ojson convexity_report_to_json(const ConvexityReport& rep) {
  ojson j;
  j["samples"] = rep.samples;
  j["violations"] = ojson::array();
  for (const ConvexityViolation& v : rep.violations) {
    j["violations"].push_back({{"lambda", v.lambda}, {"gap", v.gap}});
  }
  return j;
}

inline ojson assignment_to_json(const CausalPOMDP& m, std::size_t state) {
  ojson j = ojson::object();
  std::vector<std::size_t> digits = m.state_of(state);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    j[m.variables[i].name] = m.variables[i].values[digits[i]];
  }
  return j;
}

inline std::string render_trajectory(const CausalPOMDP& m,
                                     const Trajectory& traj,
                                     const std::string& model_hash) {
  ojson j;
  j["metadata"] = {{"model_hash", model_hash},
                   {"domain", traj.domain},
                   {"seed", traj.seed},
                   {"rng_algorithm", std::string(Rng::kAlgorithm)}};
  j["initial_state"] = assignment_to_json(m, traj.initial_state);
  ojson steps = ojson::array();
  for (const Trajectory::Step& s : traj.steps) {
    ojson e;
    e["action"] = m.actions[s.action];
    e["state"] = assignment_to_json(m, s.state);
    e["observation"] = ojson::object();
    for (std::size_t v : m.observable_vars()) {
      e["observation"][m.variables[v].name] =
          m.variables[v].values[m.state_of(s.state)[v]];
    }
    e["reward"] = s.reward;
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  return j.dump(2) + "\n";
}

inline std::string render_identification_json(const IdentificationReport& rep) {
  ojson j;
  j["seed"] = rep.seed;
  j["rng_algorithm"] = rep.rng_algorithm;
  j["episodes"] = rep.episodes;
  j["steps"] = rep.steps;
  j["domains"] = rep.domains;
  j["true_domain"] = rep.true_domain;
  j["mean_true_mass"] = rep.mean_true_mass;
  j["flagged_episodes"] = rep.flagged_episodes;
  j["posteriors"] = rep.posteriors;
  return j.dump(2) + "\n";
}

/// CSV companion for plotting: one row per (step, episode, domain).
inline std::string render_identification_csv(const IdentificationReport& rep) {
  std::string out = "step,episode,domain,posterior\n";
  char buf[64];
  for (std::size_t t = 0; t <= rep.steps; ++t) {
    for (std::size_t e = 0; e < rep.episodes; ++e) {
      for (std::size_t d = 0; d < rep.domains.size(); ++d) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%.17g\n", t, e,
                      rep.domains[d].c_str(), rep.posteriors[e][t][d]);
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace cpomdp
