#pragma once

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfchain/catalog.hpp"
#include "wfchain/types.hpp"
#include "wfchain/workflow.hpp"

namespace wfchain {

struct ChainStep {
  TaskIndex task = 0;
  ActionType action = ActionType::Insert;
  bool unintentional = false;  // rework added by loop expansion

  friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

// Steps are kept in topological task order; no task appears twice.
struct AdaptationChain {
  std::vector<ChainStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  const ChainStep* step_for(TaskIndex t) const;
  bool touches(TaskIndex t) const { return step_for(t) != nullptr; }

  // "t5:Redundancy|t6:Insert". Unintentional flags do not take part.
  std::string key(const Workflow& w) const;

  friend bool operator==(const AdaptationChain&, const AdaptationChain&) = default;
};

// Sorts steps topologically; throws ValidationError on a repeated task.
AdaptationChain make_chain(const Workflow& w, std::vector<ChainStep> steps);
// Inverse of key(); action names may be catalog aliases.
AdaptationChain parse_chain_key(const Workflow& w, const ThreatCatalog& catalog, std::string_view key);

// Shorter first, then the tuple of topological positions, then the action tuple.
bool canonical_less(const Workflow& w, const AdaptationChain& a, const AdaptationChain& b);
void sort_canonical(const Workflow& w, std::vector<AdaptationChain>& chains);

struct ChainConstraint {
  enum class Kind { Conflicting, Essential };
  Kind kind = Kind::Conflicting;
  TaskIndex left_task = 0;
  ActionType left_action = ActionType::Insert;
  TaskIndex right_task = 0;
  ActionType right_action = ActionType::Insert;

  friend bool operator==(const ChainConstraint&, const ChainConstraint&) = default;
};

// { "kind": "conflict"|"essential", "left": ["t4","Insert"], "right": ["t5","Insert"] }
ChainConstraint parse_constraint(const Workflow& w, const ThreatCatalog& catalog, const nlohmann::json& doc,
                                 const std::string& path = "constraint");
nlohmann::json to_json(const Workflow& w, const ChainConstraint& c);

// One action as it was carried out, with the tuple and mitigation score it was
// charged at.
struct AppliedStep {
  TaskIndex task = 0;
  ActionType action = ActionType::Insert;
  bool unintentional = false;
  AdaptationActionSpec resolved;
  double mitigation_score = 0.0;
};

struct HistoryEntry {
  TaskIndex vt = 0;
  std::string attack;
  Severity severity = Severity::Low;
  std::vector<AppliedStep> steps;
};

// Chains applied so far in one workflow instance, in detection order.
class AdaptationHistory {
 public:
  std::span<const HistoryEntry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::optional<TaskIndex> previous_vt() const;

  // Most recent step on t, if any.
  const AppliedStep* latest(TaskIndex t) const;
  // Latest action per task, indexed by task (nullopt where none).
  std::vector<std::optional<ActionType>> latest_actions(std::size_t n_tasks) const;

  // Appends the entry. If the chain acts on its own vt, earlier steps on vt are
  // dropped first.
  void commit(HistoryEntry entry);

 private:
  std::vector<HistoryEntry> entries_;
};

// Per-task action sets seen by a constraint: history overridden by the chain.
std::vector<std::optional<ActionType>> effective_actions(std::size_t n_tasks, const AdaptationChain& chain,
                                                         const AdaptationHistory& history);
bool constraint_matches(const ChainConstraint& c, std::span<const std::optional<ActionType>> effective);
bool any_constraint_matches(std::span<const ChainConstraint> constraints,
                            std::span<const std::optional<ActionType>> effective);

}  // namespace wfchain
