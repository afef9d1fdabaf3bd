// Command-line front end: validation, planning, filtering, policy
// evaluation, identification experiments, and the brute-force oracle,
// with a reproducibility manifest on every run.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpomdp/belief.hpp"
#include "cpomdp/core.hpp"
#include "cpomdp/io.hpp"
#include "cpomdp/model.hpp"
#include "cpomdp/oracle.hpp"
#include "cpomdp/planning.hpp"
#include "cpomdp/rng.hpp"
#include "cpomdp/shift.hpp"
#include "cpomdp/sim.hpp"

namespace {

constexpr const char* kToolVersion = "cpomdp 0.1.0";
constexpr std::uint64_t kPlanCheckSeed = 1;

using cpomdp::ojson;

struct Clock {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

ojson make_manifest(const std::string& command, ojson arguments,
                    const std::string& model_hash,
                    std::optional<std::uint64_t> seed, const Clock& clock) {
  ojson m;
  m["command"] = command;
  m["arguments"] = std::move(arguments);
  m["model_hash"] = model_hash;
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  m["tool_version"] = kToolVersion;
  m["rng_algorithm"] = std::string(cpomdp::Rng::kAlgorithm);
  m["wall_time_ms"] = clock.elapsed_ms();
  return m;
}

void print_envelope(ojson manifest, ojson extras) {
  ojson out;
  out["manifest"] = std::move(manifest);
  for (auto& [key, value] : extras.items()) out[key] = std::move(value);
  std::fputs((out.dump(2) + "\n").c_str(), stdout);
}

std::size_t node_budget_from_env() {
  const char* raw = std::getenv("CPOMDP_NODE_BUDGET");
  if (!raw || !*raw) return 1'000'000;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) {
    std::fprintf(stderr,
                 "warning: ignoring invalid CPOMDP_NODE_BUDGET \"%s\"\n", raw);
    return 1'000'000;
  }
  return std::size_t(v);
}

void warn_if_no_identity(const cpomdp::DomainSet& domains) {
  if (!domains.contains_identity()) {
    std::fprintf(stderr,
                 "warning: selected domain set contains no identity (base) "
                 "domain\n");
  }
}

std::string csv_path_for(const std::string& json_path) {
  std::string out = json_path;
  if (out.size() >= 5 && out.substr(out.size() - 5) == ".json") {
    out = out.substr(0, out.size() - 5);
  }
  return out + ".csv";
}

struct ModelArg {
  std::string path;
  std::string text;
  std::string hash;
  cpomdp::LoadedModel loaded;
};

ModelArg load_model_arg(const std::string& path) {
  ModelArg arg;
  arg.path = path;
  arg.text = cpomdp::read_text_file(path);
  arg.hash = cpomdp::fnv1a64_hex(arg.text);
  arg.loaded = cpomdp::load_model_text(arg.text);
  return arg;
}

const cpomdp::DomainSpec& resolve_single_domain(
    const cpomdp::LoadedModel& loaded, const std::string& name,
    std::vector<cpomdp::DomainSpec>& storage) {
  storage = loaded.domains;
  if (storage.empty()) storage.push_back(cpomdp::identity_domain());
  for (const cpomdp::DomainSpec& d : storage) {
    if (d.name == name) return d;
  }
  throw cpomdp::LookupError("unknown domain \"" + name + "\"");
}

int run_validate(const std::string& model_path, const Clock& clock) {
  std::string text = cpomdp::read_text_file(model_path);
  std::string hash = cpomdp::fnv1a64_hex(text);
  cpomdp::ValidationReport report;
  std::vector<std::string> adjustments;
  try {
    cpomdp::LoadedModel loaded = cpomdp::parse_model_text(text);
    adjustments = loaded.adjustments;
    report = cpomdp::validate_model(loaded.model);
    cpomdp::ValidationReport drep =
        cpomdp::validate_domains(loaded.model, loaded.domains);
    report.findings.insert(report.findings.end(), drep.findings.begin(),
                           drep.findings.end());
  } catch (const cpomdp::ParseError& e) {
    report.add("", "parse", e.what());
  }
  ojson extras;
  extras["report"] = ojson::parse(cpomdp::render_validation_report(report));
  extras["adjustments"] = adjustments;
  print_envelope(make_manifest("validate", {{"model", model_path}}, hash,
                               std::nullopt, clock),
                 std::move(extras));
  return report.ok() ? 0 : 1;
}

int run_plan(const std::string& model_path, const std::string& domains_sel,
             int horizon, const std::string& out_path,
             std::optional<std::size_t> check_samples, const Clock& clock) {
  ModelArg arg = load_model_arg(model_path);
  cpomdp::DomainSet domains = cpomdp::select_domains(arg.loaded, domains_sel);
  warn_if_no_identity(domains);

  std::vector<cpomdp::AlphaSet> stages =
      cpomdp::plan(arg.loaded.model, domains, horizon);
  cpomdp::write_text_file_atomic(
      out_path, cpomdp::render_alpha_set(arg.loaded.model, stages.back(),
                                         domains.size()));

  ojson extras;
  extras["out"] = out_path;
  extras["stage"] = stages.back().stage;
  extras["alphas"] = stages.back().alphas.size();

  bool convex_ok = true;
  std::optional<std::uint64_t> seed;
  if (check_samples) {
    seed = kPlanCheckSeed;
    cpomdp::ConvexityReport crep =
        cpomdp::check_convexity(stages.back(), *check_samples, kPlanCheckSeed);
    extras["convexity"] = cpomdp::convexity_report_to_json(crep);
    convex_ok = crep.ok();
  }

  print_envelope(make_manifest("plan",
                               {{"model", model_path},
                                {"domains", domains_sel},
                                {"horizon", horizon},
                                {"out", out_path},
                                {"check_convexity",
                                 check_samples ? ojson(*check_samples)
                                               : ojson(nullptr)}},
                               arg.hash, seed, clock),
                 std::move(extras));
  return convex_ok ? 0 : 1;
}

int run_filter(const std::string& model_path, const std::string& domains_sel,
               const std::string& trace_path, const std::string& out_path,
               const std::string& prior_path, const Clock& clock) {
  ModelArg arg = load_model_arg(model_path);
  const cpomdp::CausalPOMDP& m = arg.loaded.model;
  cpomdp::DomainSet domains = cpomdp::select_domains(arg.loaded, domains_sel);
  warn_if_no_identity(domains);

  std::vector<cpomdp::TraceStep> trace =
      cpomdp::parse_trace_text(cpomdp::read_text_file(trace_path), m);
  cpomdp::JointBelief prior =
      prior_path.empty()
          ? cpomdp::uniform_joint_belief(m, domains)
          : cpomdp::belief_from_json(
                cpomdp::detail::parse_json(cpomdp::read_text_file(prior_path),
                                           "prior"),
                m.num_states(), domains.size(), "prior");

  std::vector<cpomdp::JointBelief> beliefs =
      cpomdp::filter_trace(m, domains, prior, trace);
  cpomdp::write_text_file_atomic(out_path,
                                 cpomdp::render_filter_output(beliefs));

  ojson extras;
  extras["out"] = out_path;
  extras["steps"] = trace.size();
  extras["final_domain_marginal"] = beliefs.back().marginal_domain();
  print_envelope(make_manifest("filter",
                               {{"model", model_path},
                                {"domains", domains_sel},
                                {"trace", trace_path},
                                {"out", out_path},
                                {"prior",
                                 prior_path.empty() ? ojson(nullptr)
                                                    : ojson(prior_path)}},
                               arg.hash, std::nullopt, clock),
                 std::move(extras));
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& policy_path,
                 const std::string& domain_name, int horizon,
                 std::optional<std::size_t> mc_episodes, std::uint64_t seed,
                 const Clock& clock) {
  ModelArg arg = load_model_arg(model_path);
  const cpomdp::CausalPOMDP& m = arg.loaded.model;
  std::vector<cpomdp::DomainSpec> storage;
  const cpomdp::DomainSpec& sigma =
      resolve_single_domain(arg.loaded, domain_name, storage);
  cpomdp::PolicySpec policy =
      cpomdp::load_policy_file(policy_path, m, arg.loaded.domains);

  std::vector<double> b0(m.num_states(), 1.0 / double(m.num_states()));
  std::size_t budget = node_budget_from_env();

  ojson extras;
  bool exact_ok = true;
  std::string budget_note;
  try {
    double exact = cpomdp::evaluate_policy_known_shift(
        m, sigma, policy, b0, std::size_t(horizon), budget);
    extras["exact"] = exact;
  } catch (const cpomdp::BudgetExceeded& e) {
    exact_ok = false;
    budget_note = e.what();
    extras["exact"] = nullptr;
  }

  if (mc_episodes) {
    cpomdp::McEstimate est = cpomdp::monte_carlo_policy_value(
        m, sigma, policy, std::size_t(horizon), *mc_episodes, seed);
    extras["mc"] = {{"mean", est.mean},
                    {"std_error", est.std_error},
                    {"episodes", est.episodes}};
  } else if (!exact_ok) {
    std::fprintf(stderr, "error: %s\n", budget_note.c_str());
    return 1;
  }

  print_envelope(make_manifest("evaluate",
                               {{"model", model_path},
                                {"policy", policy_path},
                                {"domain", domain_name},
                                {"horizon", horizon},
                                {"mc",
                                 mc_episodes ? ojson(*mc_episodes)
                                             : ojson(nullptr)},
                                {"node_budget", budget}},
                               arg.hash,
                               mc_episodes ? std::optional<std::uint64_t>(seed)
                                           : std::nullopt,
                               clock),
                 std::move(extras));
  return 0;
}

int run_identify(const std::string& model_path, const std::string& domains_sel,
                 const std::string& true_name, const std::string& policy_path,
                 std::size_t steps, std::size_t episodes, std::uint64_t seed,
                 const std::string& out_path, const Clock& clock) {
  ModelArg arg = load_model_arg(model_path);
  const cpomdp::CausalPOMDP& m = arg.loaded.model;
  cpomdp::DomainSet domains = cpomdp::select_domains(arg.loaded, domains_sel);
  warn_if_no_identity(domains);

  cpomdp::PolicySpec policy;
  if (policy_path.empty()) {
    // Documented fallback: always take the first declared action.
    cpomdp::ReactivePolicy r;
    r.initial_action = 0;
    r.by_observation.assign(m.num_observations(), 0);
    policy.policy = std::move(r);
  } else {
    policy = cpomdp::load_policy_file(policy_path, m, arg.loaded.domains);
  }

  cpomdp::IdentificationReport report = cpomdp::identification_experiment(
      m, domains, true_name, policy, steps, episodes, seed);

  std::string csv_path = csv_path_for(out_path);
  cpomdp::write_text_file_atomic(out_path,
                                 cpomdp::render_identification_json(report));
  cpomdp::write_text_file_atomic(csv_path,
                                 cpomdp::render_identification_csv(report));

  ojson extras;
  extras["out"] = out_path;
  extras["csv"] = csv_path;
  extras["final_mean_true_mass"] = report.mean_true_mass.back();
  extras["flagged_episodes"] = report.flagged_episodes.size();
  print_envelope(make_manifest("identify",
                               {{"model", model_path},
                                {"domains", domains_sel},
                                {"true", true_name},
                                {"policy",
                                 policy_path.empty() ? ojson(nullptr)
                                                     : ojson(policy_path)},
                                {"steps", steps},
                                {"episodes", episodes},
                                {"out", out_path}},
                               arg.hash, seed, clock),
                 std::move(extras));
  return 0;
}

int run_oracle(const std::string& model_path, const std::string& domains_sel,
               int horizon, const std::string& beliefs_path,
               const std::string& out_path, const Clock& clock) {
  ModelArg arg = load_model_arg(model_path);
  const cpomdp::CausalPOMDP& m = arg.loaded.model;
  cpomdp::DomainSet domains = cpomdp::select_domains(arg.loaded, domains_sel);
  warn_if_no_identity(domains);

  std::vector<cpomdp::JointBelief> beliefs = cpomdp::parse_beliefs_text(
      cpomdp::read_text_file(beliefs_path), m.num_states(), domains.size());

  cpomdp::OracleConfig config;
  config.node_budget = node_budget_from_env();
  cpomdp::JointKernel kernel(m, domains);
  std::vector<double> values;
  values.reserve(beliefs.size());
  for (const cpomdp::JointBelief& b : beliefs) {
    values.push_back(
        cpomdp::expectimax_value(kernel, b, std::size_t(horizon), config));
  }

  ojson extras;
  extras["values"] = values;
  if (!out_path.empty()) {
    ojson doc;
    doc["values"] = values;
    cpomdp::write_text_file_atomic(out_path, doc.dump(2) + "\n");
    extras["out"] = out_path;
  }
  print_envelope(make_manifest("oracle",
                               {{"model", model_path},
                                {"domains", domains_sel},
                                {"horizon", horizon},
                                {"beliefs", beliefs_path},
                                {"node_budget", config.node_budget}},
                               arg.hash, std::nullopt, clock),
                 std::move(extras));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Clock clock;
  CLI::App app{"factored POMDP toolkit with stochastic shift domains"};
  app.require_subcommand(1);

  std::string model_path, domains_sel = "all", out_path, trace_path;
  std::string policy_path, prior_path, domain_name, true_name, beliefs_path;
  int horizon = 0;
  std::size_t steps = 0, episodes = 0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> check_samples, mc_episodes;

  CLI::App* validate =
      app.add_subcommand("validate", "check a model file against every "
                                     "model invariant");
  validate->add_option("model", model_path, "model file")->required();

  CLI::App* plan = app.add_subcommand(
      "plan", "exact finite-horizon value iteration over (state, domain)");
  plan->add_option("model", model_path, "model file")->required();
  plan->add_option("--domains", domains_sel,
                   "comma-separated domain names, or \"all\"");
  plan->add_option("--horizon", horizon, "planning horizon (stages)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  plan->add_option("--out", out_path, "alpha set output file")->required();
  auto* check_opt = plan->add_option(
      "--check-convexity", "sample count for the value-surface convexity "
                           "check; any violation fails the run");

  CLI::App* filter = app.add_subcommand(
      "filter", "run the exact joint state-domain filter along a trace");
  filter->add_option("model", model_path, "model file")->required();
  filter->add_option("--domains", domains_sel,
                     "comma-separated domain names, or \"all\"");
  filter->add_option("--trace", trace_path, "trace file")->required();
  filter->add_option("--out", out_path, "belief sequence output file")
      ->required();
  filter->add_option("--prior", prior_path,
                     "initial joint belief file (default: uniform)");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "expected discounted return of a policy under a known "
                  "domain");
  evaluate->add_option("model", model_path, "model file")->required();
  evaluate->add_option("--policy", policy_path, "policy file")->required();
  evaluate->add_option("--domain", domain_name, "true domain name")
      ->required();
  evaluate->add_option("--horizon", horizon, "evaluation horizon")
      ->required()
      ->check(CLI::NonNegativeNumber);
  auto* mc_opt = evaluate->add_option(
      "--mc", "episode count for a Monte Carlo estimate alongside the exact "
              "value");
  evaluate->add_option("--seed", seed, "Monte Carlo seed (default 1)");

  CLI::App* identify = app.add_subcommand(
      "identify", "measure how fast the filter identifies the true domain");
  identify->add_option("model", model_path, "model file")->required();
  identify->add_option("--domains", domains_sel,
                       "comma-separated domain names, or \"all\"");
  identify->add_option("--true", true_name, "generating domain name")
      ->required();
  identify->add_option("--policy", policy_path,
                       "policy file (default: always the first action)");
  identify->add_option("--steps", steps, "steps per episode")->required();
  identify->add_option("--episodes", episodes, "episode count")->required();
  identify->add_option("--seed", seed, "experiment seed (default 1)");
  identify->add_option("--out", out_path, "report output file (.json; a .csv "
                                          "companion is written next to it)")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "brute-force expectimax values for a list of joint beliefs");
  oracle->add_option("model", model_path, "model file")->required();
  oracle->add_option("--domains", domains_sel,
                     "comma-separated domain names, or \"all\"");
  oracle->add_option("--horizon", horizon, "search depth")
      ->required()
      ->check(CLI::NonNegativeNumber);
  oracle->add_option("--beliefs", beliefs_path, "joint belief list file")
      ->required();
  oracle->add_option("--out", out_path, "optional values output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (check_opt->count() > 0) {
    check_samples = check_opt->as<std::size_t>();
  }
  if (mc_opt->count() > 0) {
    mc_episodes = mc_opt->as<std::size_t>();
  }

  try {
    if (validate->parsed()) return run_validate(model_path, clock);
    if (plan->parsed()) {
      return run_plan(model_path, domains_sel, horizon, out_path,
                      check_samples, clock);
    }
    if (filter->parsed()) {
      return run_filter(model_path, domains_sel, trace_path, out_path,
                        prior_path, clock);
    }
    if (evaluate->parsed()) {
      return run_evaluate(model_path, policy_path, domain_name, horizon,
                          mc_episodes, seed, clock);
    }
    if (identify->parsed()) {
      return run_identify(model_path, domains_sel, true_name, policy_path,
                          steps, episodes, seed, out_path, clock);
    }
    if (oracle->parsed()) {
      return run_oracle(model_path, domains_sel, horizon, beliefs_path,
                        out_path, clock);
    }
  } catch (const cpomdp::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const cpomdp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 2;
}
