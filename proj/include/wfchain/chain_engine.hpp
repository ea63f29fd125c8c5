#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfchain/catalog.hpp"
#include "wfchain/chain.hpp"
#include "wfchain/sdm.hpp"
#include "wfchain/workflow.hpp"

namespace wfchain {

struct CostTuple {
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  double mitigation_score = 0.0;
};

struct CostBreakdown {
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  double mitigation_score = 0.0;
  double total = 0.0;

  bool infeasible() const { return total == std::numeric_limits<double>::infinity(); }
};

// +P, +T, -V, -MS with the given magnitudes.
double weighted_total(const Weights& w, double price, double time, double value, double ms);

// Resolved (P, T, V, MI) for every (task, action) pair under one set of
// service bindings, plus each task's default execution tuple.
class ActionTable {
 public:
  static ActionTable build(const Workflow& w, const ThreatCatalog& catalog, std::span<const BindingContext> bindings);
  // Every task bound to the same quote, backup equal to primary.
  static ActionTable uniform(const Workflow& w, const ThreatCatalog& catalog, ServiceQuote quote,
                             const AdaptationParameters& params = {});

  const AdaptationActionSpec& spec(TaskIndex t, ActionType a) const;
  // Bound service (P, T), the task's own V, MS 0.
  CostTuple default_cost(TaskIndex t) const { return defaults_.at(t); }
  std::size_t size() const { return defaults_.size(); }

 private:
  std::vector<std::array<std::optional<AdaptationActionSpec>, 6>> specs_;
  std::vector<CostTuple> defaults_;
  std::vector<std::string> ids_;
};

// Everything chain operations read besides the violation itself.
struct ChainContext {
  const Workflow& workflow;
  const SecurityDependencyMatrix& sdm;
  const ThreatCatalog& catalog;
  const ActionTable& actions;
  std::span<const ChainConstraint> constraints;
};

struct Violation {
  TaskIndex vt = 0;
  std::string attack;
  Severity severity = Severity::High;
};

struct GenerationLimits {
  std::size_t max_chain_length = 4;
  std::size_t max_chains = 200000;
};

struct CandidateSet {
  std::vector<AdaptationChain> chains;  // canonical order
  bool truncated = false;
};

ActionSet feasible_actions(const TaskSpec& task, const ThreatCatalog& catalog, std::string_view attack,
                           Severity severity);

// Number of nonempty chains over dependent tasks, saturating at SIZE_MAX.
std::size_t chain_count(const Workflow& w, const SecurityDependencyMatrix& sdm, const ThreatCatalog& catalog,
                        const Violation& v);

// Incremental Cartesian construction over the dependent tasks, then sorted
// canonically. Falls back to the length-ordered enumerator (flagged truncated)
// when the full count exceeds limits.max_chains.
CandidateSet generate_chain_set(const Workflow& w, const SecurityDependencyMatrix& sdm,
                                const ThreatCatalog& catalog, const Violation& v, const GenerationLimits& limits = {});

// Canonical-order enumeration by increasing length, up to max_length steps and
// at most max_chains chains. `per_task` pairs each task with its action set.
CandidateSet enumerate_by_length(const Workflow& w, std::span<const std::pair<TaskIndex, ActionSet>> per_task,
                                 std::size_t max_length, std::size_t max_chains);

// Adds unintentional Rework on every task in pred(vt) ∩ succ(sp) outside the
// chain, for each starting point sp. Result re-sorted and deduplicated by key.
std::vector<AdaptationChain> expand_chain_loops(const Workflow& w, TaskIndex vt,
                                                std::span<const AdaptationChain> chains);
AdaptationChain expand_chain_loop(const Workflow& w, TaskIndex vt, const AdaptationChain& chain);

std::vector<AdaptationChain> resolve_constraints(std::span<const AdaptationChain> chains,
                                                 std::span<const ChainConstraint> constraints,
                                                 const AdaptationHistory& history, std::size_t n_tasks);

double mitigation_score(const Cia& mi, const Cia& task_requirements, const Cia& attack_impact, const Cia& sdm_entry);
double mitigation_score(const AdaptationActionSpec& action, const TaskSpec& task, TaskIndex t, TaskIndex vt,
                        const Cia& attack_impact, const SecurityDependencyMatrix& sdm);

// Costs many chains against one (violation, history). The replay segment is
// chain independent and computed once.
class ChainEvaluator {
 public:
  ChainEvaluator(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                 const Weights& weights);

  CostBreakdown cost(const AdaptationChain& chain) const;
  double step_ms(TaskIndex t, ActionType a) const;
  const AdaptationActionSpec& step_spec(TaskIndex t, ActionType a) const { return ctx_.actions.spec(t, a); }

 private:
  ChainContext ctx_;
  Violation v_;
  Weights weights_;
  Cia impact_;
  CostTuple baseline_;
  CostTuple vt_fallback_;
  std::vector<char> in_scope_;  // vt ∪ pred(vt)
  std::vector<std::optional<ActionType>> effective_base_;
};

CostBreakdown chain_cost(const ChainContext& ctx, const AdaptationChain& chain, const AdaptationHistory& history,
                         const Weights& weights, const Violation& v);

// generate -> expand -> resolve.
CandidateSet candidate_chains(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                              const GenerationLimits& limits = {});

struct RankedChain {
  AdaptationChain chain;
  CostBreakdown cost;
};

// Chains sorted by total, ties kept in canonical order.
std::vector<RankedChain> rank_chains(const ChainContext& ctx, std::span<const AdaptationChain> chains,
                                     const AdaptationHistory& history, const Weights& weights, const Violation& v);

// Index of the minimum-cost chain; ties go to the earliest. NoFeasibleChainError on empty input.
std::size_t argmin_chain(const ChainEvaluator& eval, std::span<const AdaptationChain> chains);

// Exhaustive argmin over the resolved set. Throws NoFeasibleChainError when the
// set is empty and SelectionError when generation was truncated.
RankedChain optimal_chain_exhaustive(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                                     const Weights& weights, const GenerationLimits& limits = {});

}  // namespace wfchain
