#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfchain/catalog.hpp"
#include "wfchain/chain.hpp"
#include "wfchain/chain_engine.hpp"
#include "wfchain/types.hpp"
#include "wfchain/workflow.hpp"

namespace wfchain {

struct CloudService {
  std::string id;
  std::string provider;
  double price = 0.0;
  double time = 0.0;
  Cia security;
  std::map<std::string, double> afr;  // attack type -> rate in [0,1]

  double total_afr() const;
};

struct Tenant {
  std::string id = "tenant";
  Weights weights;
  Severity adapt_threshold = Severity::Low;  // bands below this are logged only
};

struct BindingPolicy {
  enum class Kind { Cheapest, Fastest, Random };
  Kind kind = Kind::Cheapest;
  std::uint64_t seed = 0;
};

// "cheapest" | "fastest" | "random" | "random:<seed>"
BindingPolicy parse_binding_policy(std::string_view text);
std::string to_string(const BindingPolicy& p);

// A violation fixed in advance, replacing stochastic injection.
struct ScriptedViolation {
  TaskIndex task = 0;
  std::string attack;
  Severity severity = Severity::High;
  double score = 1.0;
};

struct Scenario {
  explicit Scenario(Workflow w) : workflow(std::move(w)) {}

  Workflow workflow;
  std::vector<std::string> providers;
  std::vector<CloudService> services;
  std::vector<std::vector<std::size_t>> candidates;  // per task, indexes into services
  Tenant tenant;
  std::vector<ChainConstraint> constraints;
  AdaptationParameters params;
  std::map<TaskIndex, AdaptationParameters> task_params;
  ThreatCatalog catalog = ThreatCatalog::builtin();
  BindingPolicy binding_policy;
  std::vector<ScriptedViolation> scripted;
  std::size_t detection_delay = 0;  // tasks completed before a violation surfaces
  GenerationLimits limits;

  const AdaptationParameters& params_for(TaskIndex t) const;
  std::size_t service_index(std::string_view id) const;  // LookupError
};

// Relative paths ("workflow": "w.json", "catalog": "c.json") resolve against base_dir.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
nlohmann::json to_json(const Scenario& s);

}  // namespace wfchain
