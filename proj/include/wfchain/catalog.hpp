#pragma once

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfchain/types.hpp"
#include "wfchain/workflow.hpp"

namespace wfchain {

struct AttackSpec {
  std::string type;
  Cia impact;
  std::array<ActionSet, 3> mitigation_by_severity;  // indexed by Severity

  const ActionSet& mitigation(Severity s) const { return mitigation_by_severity[static_cast<std::size_t>(s)]; }
  bool monotone() const;
};

// Attribute formulas an action may select. They encode the rows of the
// adaptation-type property table as data.
enum class TimeFormula { Zero, NewTask, Switch, Backup, MaxBackupPrimary, PrimaryPlusReconfig };
enum class PriceFormula { Zero, NewTask, Primary, Backup, PrimaryPlusBackup, PrimaryPlusReconfig };
enum class ValueFormula { Zero, NewTask, Switch, Task, TaskPlusRedundancy, TaskPlusReconfig };

struct ActionProfile {
  ActionType type = ActionType::Insert;
  Cia mitigation_impact;
  TimeFormula time = TimeFormula::Zero;
  PriceFormula price = PriceFormula::Zero;
  ValueFormula value = ValueFormula::Zero;
};

// Resolved (P, T, V, MI) of one adaptation action on one task.
struct AdaptationActionSpec {
  ActionType action_type = ActionType::Insert;
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  Cia mitigation_impact;
  friend bool operator==(const AdaptationActionSpec&, const AdaptationActionSpec&) = default;
};

// Free parameters of the property formulas, as multipliers of the bound
// service's (T, P) and the task value.
struct AdaptationParameters {
  double new_task_time = 1.0;
  double new_task_price = 1.0;
  double new_task_value = 1.0;
  double switch_time = 1.1;
  double switch_value = 1.0;
  double reconfig_time = 0.3;
  double reconfig_price = 0.3;
  double redundancy_value = 0.2;
  double reconfig_value = 0.1;
  friend bool operator==(const AdaptationParameters&, const AdaptationParameters&) = default;
};

struct ServiceQuote {
  double price = 0.0;
  double time = 0.0;
};

// What a task is bound to when its adaptation properties are resolved.
struct BindingContext {
  ServiceQuote primary;
  std::optional<ServiceQuote> backup;
  AdaptationParameters params;
};

class ThreatCatalog {
 public:
  static ThreatCatalog from_json(const nlohmann::json& doc);
  static ThreatCatalog load(const std::string& path);
  // The default catalog shipped in data/catalog.json, compiled in.
  static const ThreatCatalog& builtin();

  nlohmann::json to_json() const;

  const AttackSpec& attack(std::string_view type) const;  // CatalogError if unknown
  bool has_attack(std::string_view type) const;
  std::vector<std::string> attack_types() const;
  const ActionProfile& action(ActionType type) const;

  // Canonical name or catalog alias (e.g. a fixture's "Late") to an action type.
  ActionType resolve_action_name(std::string_view name) const;
  const std::map<std::string, ActionType>& aliases() const { return aliases_; }

  // Attacks whose mitigation sets are not nested Low ⊆ Medium ⊆ High.
  std::vector<std::string> non_monotone_attacks() const;

  friend bool operator==(const ThreatCatalog& a, const ThreatCatalog& b);

 private:
  std::vector<AttackSpec> attacks_;
  std::array<ActionProfile, 6> actions_{};
  std::map<std::string, ActionType> aliases_;
};

Cia attack_impact(const ThreatCatalog& catalog, std::string_view attack_type);
ActionSet mitigation_actions_for(const ThreatCatalog& catalog, std::string_view attack_type, Severity severity);

// Fills (T, P, V, MI) for `action` on `task`. Throws FeasibilityError when the
// action is not feasible for the task (unless check_feasible is false, as for
// unintentional rework) and BindingError when a backup service is required but absent.
AdaptationActionSpec adaptation_properties(const ThreatCatalog& catalog, ActionType action, const TaskSpec& task,
                                           const BindingContext& binding, bool check_feasible = true);

}  // namespace wfchain
