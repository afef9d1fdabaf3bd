#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "common.hpp"
#include "cpomdp/oracle.hpp"
#include "cpomdp/planning.hpp"
#include "reference.hpp"

using cpomdp::AlphaSet;
using cpomdp::DomainSet;
using cpomdp::DomainSpec;
using cpomdp::JointBelief;
using cpomdp::LoadedModel;
using cpomdp::OracleConfig;
using cpomdp::PolicySpec;

namespace {

DomainSet single(const DomainSpec& d) {
  return DomainSet(std::vector<DomainSpec>{d});
}

}  // namespace

TEST(Expectimax, HorizonZeroIsTheBestImmediateReward) {
  LoadedModel lm = testutil::load_tiger();
  DomainSet both(lm.domains);
  JointBelief uniform = cpomdp::uniform_joint_belief(lm.model, both);
  EXPECT_DOUBLE_EQ(cpomdp::expectimax_value(lm.model, both, uniform, 0),
                   -1.0);
}

TEST(Expectimax, DeterministicChainSumsTheDiscountedPath) {
  cpomdp::CausalPOMDP m;
  m.variables = {{"x", {"x0", "x1"}}};
  m.actions = {"go"};
  m.graph.parents = {{{"x"}, {}}};
  cpomdp::ConditionalTable t;
  t.arity = 2;
  t.p = {0.0, 1.0, 1.0, 0.0};  // deterministic alternation
  m.transition.tables = {{t}};
  m.reward_spec.vars = {"x"};
  m.reward_spec.by_action = {{1.0, 2.0}};
  m.observation.vars = {"x"};
  m.gamma = 0.5;
  m.finalize();
  ASSERT_EQ(m.num_observations(), 2u);

  DomainSet id = single({"identity", {}});
  JointBelief start = JointBelief::product(std::vector<double>{1.0, 0.0},
                                           std::vector<double>{1.0});
  // Path rewards 1, 2, 1, 2 discounted by 0.5.
  double want = 1.0 + 0.5 * 2.0 + 0.25 * 1.0 + 0.125 * 2.0;
  EXPECT_NEAR(cpomdp::expectimax_value(m, id, start, 3), want, 1e-12);
}

TEST(Expectimax, AgreesWithPlannerOnTiger) {
  LoadedModel lm = testutil::load_tiger();
  for (const DomainSet& ds :
       {single(lm.domains[0]), DomainSet(lm.domains)}) {
    std::vector<AlphaSet> stages = cpomdp::plan(lm.model, ds, 2);
    cpomdp::JointKernel kernel(lm.model, ds);
    std::mt19937_64 g(51);
    for (int k = 0; k < 20; ++k) {
      JointBelief b(lm.model.num_states(), ds.size(),
                    ref::random_joint_belief(g, lm.model.num_states(),
                                             ds.size()));
      for (std::size_t h = 0; h <= 2; ++h) {
        EXPECT_NEAR(cpomdp::expectimax_value(kernel, b, h),
                    cpomdp::value_at(stages[h], b).first, 1e-10);
      }
    }
  }
}

TEST(Expectimax, AgreesWithTheFlatReference) {
  std::mt19937_64 g(52);
  for (int trial = 0; trial < 10; ++trial) {
    ref::RandomInstance inst = ref::random_instance(g, false, 3);
    ref::FlatFilter flat(inst.model, inst.domains);
    cpomdp::JointKernel kernel(inst.model, inst.domains);
    for (int k = 0; k < 5; ++k) {
      JointBelief b(inst.model.num_states(), inst.domains.size(),
                    ref::random_joint_belief(g, inst.model.num_states(),
                                             inst.domains.size()));
      for (std::size_t h = 0; h <= 3; ++h) {
        EXPECT_NEAR(cpomdp::expectimax_value(kernel, b, h),
                    ref::expectimax(flat, b.data(), h), 1e-10);
      }
    }
  }
}

TEST(Expectimax, NodeAccountingIsExact) {
  LoadedModel lm = testutil::load_tiger();
  DomainSet both(lm.domains);
  cpomdp::JointKernel kernel(lm.model, both);
  JointBelief uniform = cpomdp::uniform_joint_belief(lm.model, both);

  std::size_t nodes = 0;
  double v1 = cpomdp::expectimax_value(kernel, uniform, 2, {}, &nodes);
  ASSERT_GT(nodes, 1u);

  // A budget of exactly `nodes` succeeds; one less fails.
  OracleConfig tight;
  tight.node_budget = nodes;
  std::size_t again = 0;
  double v2 = cpomdp::expectimax_value(kernel, uniform, 2, tight, &again);
  EXPECT_EQ(again, nodes);
  EXPECT_DOUBLE_EQ(v1, v2);

  OracleConfig short_one;
  short_one.node_budget = nodes - 1;
  try {
    cpomdp::expectimax_value(kernel, uniform, 2, short_one);
    FAIL() << "expected BudgetExceeded";
  } catch (const cpomdp::BudgetExceeded& e) {
    EXPECT_EQ(e.budget(), nodes - 1);
    EXPECT_EQ(e.expanded(), nodes);
  }
}

TEST(OraclePolicyValue, AlwaysListenClosedForm) {
  LoadedModel lm = testutil::load_tiger();
  const cpomdp::CausalPOMDP& m = lm.model;
  PolicySpec always_listen;
  always_listen.policy = cpomdp::ReactivePolicy{
      m.action_index("listen"),
      {m.action_index("listen"), m.action_index("listen")}};
  std::vector<double> b0(m.num_states(), 0.25);
  for (std::size_t h : {0u, 2u, 4u}) {
    double want = 0.0;
    for (std::size_t k = 0; k <= h; ++k) want -= std::pow(0.95, double(k));
    EXPECT_NEAR(cpomdp::oracle_policy_value(m, lm.domains[1], always_listen,
                                            b0, h),
                want, 1e-12);
  }
}

TEST(OraclePolicyValue, AgreesWithTheBeliefTreeEvaluator) {
  LoadedModel lm = testutil::load_tiger();
  const cpomdp::CausalPOMDP& m = lm.model;
  std::vector<double> b0(m.num_states(), 0.25);

  std::vector<PolicySpec> policies;
  {
    PolicySpec p;
    p.policy = cpomdp::ReactivePolicy{
        m.action_index("listen"),
        {m.action_index("listen"), m.action_index("listen")}};
    policies.push_back(p);
    p.policy = cpomdp::ReactivePolicy{
        m.action_index("listen"),
        {m.action_index("open-right"), m.action_index("open-left")}};
    policies.push_back(p);
    cpomdp::GreedyPolicy greedy;
    greedy.domains = DomainSet(lm.domains);
    greedy.stages = cpomdp::plan(m, greedy.domains, 3);
    greedy.domain_prior = {0.5, 0.5};
    p.policy = greedy;
    policies.push_back(p);
  }

  for (const PolicySpec& policy : policies) {
    for (const DomainSpec& sigma : lm.domains) {
      for (std::size_t h = 0; h <= 3; ++h) {
        EXPECT_NEAR(
            cpomdp::oracle_policy_value(m, sigma, policy, b0, h),
            cpomdp::evaluate_policy_known_shift(m, sigma, policy, b0, h),
            1e-10);
      }
    }
  }
}

// Acting greedily against the stage-h sets, with the agent's hypothesis
// set equal to the true singleton domain, achieves the optimal value.
TEST(OraclePolicyValue, GreedyExtractionIsOptimalAtMatchingHorizon) {
  LoadedModel lm = testutil::load_tiger();
  const cpomdp::CausalPOMDP& m = lm.model;
  DomainSet id = single(lm.domains[0]);

  cpomdp::GreedyPolicy greedy;
  greedy.domains = id;
  greedy.stages = cpomdp::plan(m, id, 3);
  greedy.domain_prior = {1.0};
  PolicySpec spec;
  spec.policy = greedy;

  std::vector<double> b0(m.num_states(), 0.25);
  JointBelief jb0 = JointBelief::product(b0, std::vector<double>{1.0});
  for (std::size_t h = 0; h <= 3; ++h) {
    EXPECT_NEAR(cpomdp::oracle_policy_value(m, lm.domains[0], spec, b0, h),
                cpomdp::expectimax_value(m, id, jb0, h), 1e-8);
  }
}

TEST(OraclePolicyValue, ZeroRewardModelValuesEverythingAtZero) {
  cpomdp::CausalPOMDP m;
  m.variables = {{"x", {"x0", "x1"}}};
  m.actions = {"a", "b"};
  m.graph.parents = {{{"x"}, {}}};
  cpomdp::ConditionalTable t;
  t.arity = 2;
  t.p = {0.5, 0.5, 0.5, 0.5};
  m.transition.tables = {{t, t}};
  m.reward_spec.vars = {};
  m.reward_spec.by_action = {{0.0}, {0.0}};
  m.observation.vars = {"x"};
  m.gamma = 0.9;
  m.finalize();

  PolicySpec flip;
  flip.policy = cpomdp::ReactivePolicy{0, {1, 0}};
  std::vector<double> b0{0.5, 0.5};
  EXPECT_DOUBLE_EQ(
      cpomdp::oracle_policy_value(m, {"identity", {}}, flip, b0, 4), 0.0);
}

TEST(Oracle, DeterministicAcrossRuns) {
  LoadedModel lm = testutil::load_tiger();
  DomainSet both(lm.domains);
  cpomdp::JointKernel kernel(lm.model, both);
  std::mt19937_64 g(53);
  JointBelief b(4, 2, ref::random_joint_belief(g, 4, 2));
  double v1 = cpomdp::expectimax_value(kernel, b, 3);
  double v2 = cpomdp::expectimax_value(kernel, b, 3);
  EXPECT_EQ(v1, v2);
}
