#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "wfchain/error.hpp"
#include "wfchain/scenario.hpp"

using namespace wfchain;
using wfchain::testing::fixture;
using wfchain::testing::read_fixture;

namespace {

nlohmann::json minimal() {
  return nlohmann::json::parse(R"({
    "workflow": {"id":"w","tasks":[{"id":"a","c":0.1,"i":0.2,"a":0.3,"value":4,"actions":["Insert"]}]},
    "services": [{"id":"s1","price":2,"time":5,"c":0.5,"i":0.5,"a":0.5,"afr":{"DoS":0.4}}],
    "candidates": {"a": ["s1"]}
  })");
}

std::string error_of(const nlohmann::json& doc) {
  try {
    parse_scenario(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, LoadsInsuranceFixture) {
  auto s = load_scenario(fixture("insurance_scenario.json"));
  EXPECT_EQ(s.workflow.size(), 8u);
  EXPECT_EQ(s.services.size(), 3u);
  EXPECT_EQ(s.providers, (std::vector<std::string>{"P1", "P2"}));
  EXPECT_EQ(s.tenant.id, "insurer");
  EXPECT_EQ(s.tenant.weights, (Weights{1, 1, 1, 7}));
  ASSERT_EQ(s.constraints.size(), 3u);
  EXPECT_EQ(s.constraints[2].left_action, ActionType::Reconfiguration);
  EXPECT_EQ(s.candidates[s.workflow.index_of("t4")].size(), 3u);
  EXPECT_DOUBLE_EQ(s.services[s.service_index("mid")].total_afr(), 1.0);
  EXPECT_EQ(s.catalog.resolve_action_name("Late"), ActionType::Reconfiguration);
}

TEST(Scenario, JsonRoundTrip) {
  auto s = load_scenario(fixture("insurance_scenario.json"));
  s.scripted.push_back({s.workflow.index_of("t5"), "DoS", Severity::High, 0.9});
  s.task_params[2].switch_time = 1.5;
  s.detection_delay = 1;
  auto doc = to_json(s);
  auto again = parse_scenario(doc);
  EXPECT_EQ(to_json(again), doc);
  EXPECT_EQ(again.constraints, s.constraints);
  EXPECT_EQ(again.params_for(2).switch_time, 1.5);
  EXPECT_EQ(again.params_for(3).switch_time, 1.1);
}

TEST(Scenario, MinimalDefaults) {
  auto s = parse_scenario(minimal());
  EXPECT_EQ(s.tenant.weights, Weights{});
  EXPECT_EQ(s.tenant.adapt_threshold, Severity::Low);
  EXPECT_EQ(s.binding_policy.kind, BindingPolicy::Kind::Cheapest);
  EXPECT_EQ(s.limits.max_chains, 200000u);
  EXPECT_TRUE(s.catalog == ThreatCatalog::builtin());
}

TEST(Scenario, PathQualifiedErrors) {
  auto doc = minimal();
  doc["services"][0]["c"] = 1.5;
  EXPECT_THROW(parse_scenario(doc), ValidationError);
  EXPECT_NE(error_of(doc).find("services[0]"), std::string::npos);

  doc = minimal();
  doc["services"][0]["afr"]["Phishing"] = 0.1;
  EXPECT_NE(error_of(doc).find("services[0].afr.Phishing"), std::string::npos);

  doc = minimal();
  doc["candidates"]["a"] = {"s9"};
  EXPECT_THROW(parse_scenario(doc), ValidationError);
  EXPECT_NE(error_of(doc).find("candidates.a[0]"), std::string::npos);

  doc = minimal();
  doc["candidates"]["zz"] = {"s1"};
  EXPECT_THROW(parse_scenario(doc), ValidationError);

  doc = minimal();
  doc.erase("services");
  EXPECT_THROW(parse_scenario(doc), ParseError);

  doc = minimal();
  doc["services"][0]["price"] = "cheap";
  EXPECT_NE(error_of(doc).find("services[0].price"), std::string::npos);
}

TEST(Scenario, AdaptationOverrides) {
  auto doc = minimal();
  doc["adaptation"] = {{"switch_time", 1.3}, {"redundancy_value", 0.4}};
  auto s = parse_scenario(doc);
  EXPECT_EQ(s.params.switch_time, 1.3);
  EXPECT_EQ(s.params.redundancy_value, 0.4);
  EXPECT_EQ(s.params.reconfig_time, 0.3);
  doc["adaptation"] = {{"warp", 1.0}};
  EXPECT_THROW(parse_scenario(doc), ParseError);
}

TEST(Scenario, ScriptedViolations) {
  auto doc = minimal();
  doc["violations"] = {{{"task", "a"}, {"attack", "DoS"}, {"severity", "Medium"}},
                       {{"task", "a"}, {"attack", "Probe"}, {"score", 0.9}}};
  auto s = parse_scenario(doc);
  ASSERT_EQ(s.scripted.size(), 2u);
  EXPECT_EQ(s.scripted[0].severity, Severity::Medium);
  EXPECT_DOUBLE_EQ(s.scripted[0].score, 0.5);
  EXPECT_EQ(s.scripted[1].severity, Severity::High);
  doc["violations"] = {{{"task", "a"}, {"attack", "Phishing"}}};
  EXPECT_THROW(parse_scenario(doc), ValidationError);
}

TEST(Scenario, WeightsAsString) {
  auto doc = minimal();
  doc["tenants"] = {{{"weights", "3,3,3,1"}, {"adapt_threshold", "Medium"}}};
  auto s = parse_scenario(doc);
  EXPECT_EQ(s.tenant.weights, (Weights{3, 3, 3, 1}));
  EXPECT_EQ(s.tenant.adapt_threshold, Severity::Medium);
}

TEST(BindingPolicy, Parse) {
  EXPECT_EQ(parse_binding_policy("fastest").kind, BindingPolicy::Kind::Fastest);
  auto r = parse_binding_policy("random:17");
  EXPECT_EQ(r.kind, BindingPolicy::Kind::Random);
  EXPECT_EQ(r.seed, 17u);
  EXPECT_EQ(to_string(r), "random:17");
  EXPECT_THROW(parse_binding_policy("random:x"), ConfigError);
  EXPECT_THROW(parse_binding_policy("priciest"), ConfigError);
}
