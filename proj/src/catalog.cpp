#include "wfchain/catalog.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "json_util.hpp"
#include "wfchain/builtin_catalog.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

namespace {

using detail::json;

template <typename E, std::size_t N>
E parse_formula(const json& v, const std::string& path, const std::array<std::pair<std::string_view, E>, N>& table) {
  auto name = detail::as_string(v, path);
  for (const auto& [key, value] : table)
    if (key == name) return value;
  throw ParseError(fmt::format("{}: unknown formula selector '{}'", path, name));
}

template <typename E, std::size_t N>
std::string_view formula_name(E e, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [key, value] : table)
    if (value == e) return key;
  return "?";
}

constexpr std::array<std::pair<std::string_view, TimeFormula>, 6> kTime{{
    {"zero", TimeFormula::Zero},
    {"new_task", TimeFormula::NewTask},
    {"switch", TimeFormula::Switch},
    {"backup", TimeFormula::Backup},
    {"max_backup_primary", TimeFormula::MaxBackupPrimary},
    {"primary_plus_reconfig", TimeFormula::PrimaryPlusReconfig},
}};
constexpr std::array<std::pair<std::string_view, PriceFormula>, 6> kPrice{{
    {"zero", PriceFormula::Zero},
    {"new_task", PriceFormula::NewTask},
    {"primary", PriceFormula::Primary},
    {"backup", PriceFormula::Backup},
    {"primary_plus_backup", PriceFormula::PrimaryPlusBackup},
    {"primary_plus_reconfig", PriceFormula::PrimaryPlusReconfig},
}};
constexpr std::array<std::pair<std::string_view, ValueFormula>, 6> kValue{{
    {"zero", ValueFormula::Zero},
    {"new_task", ValueFormula::NewTask},
    {"switch", ValueFormula::Switch},
    {"task", ValueFormula::Task},
    {"task_plus_redundancy", ValueFormula::TaskPlusRedundancy},
    {"task_plus_reconfig", ValueFormula::TaskPlusReconfig},
}};

constexpr std::array<Severity, 3> kSeverities{Severity::Low, Severity::Medium, Severity::High};

}  // namespace

bool AttackSpec::monotone() const {
  return mitigation(Severity::Low).subset_of(mitigation(Severity::Medium)) &&
         mitigation(Severity::Medium).subset_of(mitigation(Severity::High));
}

ThreatCatalog ThreatCatalog::from_json(const json& doc) {
  using namespace detail;
  ThreatCatalog cat;

  if (auto it = doc.find("aliases"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("aliases: expected an object");
    for (const auto& [alias, target] : it->items()) {
      auto name = as_string(target, child("aliases", alias));
      auto type = parse_action_type(name);
      if (!type) throw ParseError(fmt::format("aliases.{}: unknown action type '{}'", alias, name));
      cat.aliases_[alias] = *type;
    }
  }

  const auto& jattacks = as_array(require(doc, "attacks", ""), "attacks");
  for (std::size_t k = 0; k < jattacks.size(); ++k) {
    const auto path = child("attacks", k);
    const auto& ja = jattacks[k];
    AttackSpec spec;
    spec.type = string_field(ja, "type", path);
    spec.impact = as_cia(require(ja, "impact", path), child(path, "impact"));
    if (!spec.impact.within_unit()) throw CatalogError(fmt::format("{}.impact: components must lie in [0,1]", path));
    const auto& jm = require(ja, "mitigation", path);
    for (auto sev : kSeverities) {
      const auto mpath = child(child(path, "mitigation"), to_string(sev));
      const auto& list = as_array(require(jm, to_string(sev), child(path, "mitigation")), mpath);
      for (std::size_t a = 0; a < list.size(); ++a) {
        auto name = as_string(list[a], child(mpath, a));
        auto type = parse_action_type(name);
        if (!type) throw ParseError(fmt::format("{}: unknown action type '{}'", child(mpath, a), name));
        spec.mitigation_by_severity[static_cast<std::size_t>(sev)].insert(*type);
      }
    }
    if (cat.has_attack(spec.type)) throw CatalogError(fmt::format("duplicate attack type '{}'", spec.type));
    cat.attacks_.push_back(std::move(spec));
  }

  std::array<bool, 6> seen{};
  const auto& jactions = as_array(require(doc, "actions", ""), "actions");
  for (std::size_t k = 0; k < jactions.size(); ++k) {
    const auto path = child("actions", k);
    const auto& jx = jactions[k];
    auto name = string_field(jx, "type", path);
    auto type = parse_action_type(name);
    if (!type) throw ParseError(fmt::format("{}.type: unknown action type '{}'", path, name));
    ActionProfile p;
    p.type = *type;
    p.mitigation_impact = as_cia(require(jx, "mi", path), child(path, "mi"));
    if (!p.mitigation_impact.within_unit()) throw CatalogError(fmt::format("{}.mi: components must lie in [0,1]", path));
    p.time = parse_formula(require(jx, "time", path), child(path, "time"), kTime);
    p.price = parse_formula(require(jx, "price", path), child(path, "price"), kPrice);
    p.value = parse_formula(require(jx, "value", path), child(path, "value"), kValue);
    auto slot = static_cast<std::size_t>(*type);
    if (seen[slot]) throw CatalogError(fmt::format("duplicate action profile '{}'", name));
    seen[slot] = true;
    cat.actions_[slot] = p;
  }
  for (auto t : kAllActionTypes)
    if (!seen[static_cast<std::size_t>(t)])
      throw CatalogError(fmt::format("catalog lacks a profile for action '{}'", to_string(t)));
  return cat;
}

ThreatCatalog ThreatCatalog::load(const std::string& path) { return from_json(detail::read_json_file(path)); }

const ThreatCatalog& ThreatCatalog::builtin() {
  static const ThreatCatalog instance = from_json(detail::parse_text(kBuiltinCatalogJson, "builtin catalog"));
  return instance;
}

json ThreatCatalog::to_json() const {
  json doc;
  doc["attacks"] = json::array();
  for (const auto& a : attacks_) {
    json mit = json::object();
    for (auto sev : kSeverities) {
      json list = json::array();
      a.mitigation(sev).for_each([&](ActionType t) { list.push_back(std::string(wfchain::to_string(t))); });
      mit[std::string(wfchain::to_string(sev))] = list;
    }
    doc["attacks"].push_back({{"type", a.type}, {"impact", detail::cia_json(a.impact)}, {"mitigation", mit}});
  }
  doc["actions"] = json::array();
  for (const auto& p : actions_) {
    doc["actions"].push_back({{"type", std::string(wfchain::to_string(p.type))},
                              {"mi", detail::cia_json(p.mitigation_impact)},
                              {"time", std::string(formula_name(p.time, kTime))},
                              {"price", std::string(formula_name(p.price, kPrice))},
                              {"value", std::string(formula_name(p.value, kValue))}});
  }
  doc["aliases"] = json::object();
  for (const auto& [alias, t] : aliases_) doc["aliases"][alias] = std::string(wfchain::to_string(t));
  return doc;
}

bool ThreatCatalog::has_attack(std::string_view type) const {
  return std::any_of(attacks_.begin(), attacks_.end(), [&](const AttackSpec& a) { return a.type == type; });
}

const AttackSpec& ThreatCatalog::attack(std::string_view type) const {
  for (const auto& a : attacks_)
    if (a.type == type) return a;
  throw CatalogError(fmt::format("unknown attack type '{}'", type));
}

std::vector<std::string> ThreatCatalog::attack_types() const {
  std::vector<std::string> out;
  for (const auto& a : attacks_) out.push_back(a.type);
  return out;
}

const ActionProfile& ThreatCatalog::action(ActionType type) const { return actions_[static_cast<std::size_t>(type)]; }

ActionType ThreatCatalog::resolve_action_name(std::string_view name) const {
  if (auto t = parse_action_type(name)) return *t;
  if (auto it = aliases_.find(std::string(name)); it != aliases_.end()) return it->second;
  throw CatalogError(fmt::format("unknown action type '{}'", name));
}

std::vector<std::string> ThreatCatalog::non_monotone_attacks() const {
  std::vector<std::string> out;
  for (const auto& a : attacks_)
    if (!a.monotone()) out.push_back(a.type);
  return out;
}

bool operator==(const ThreatCatalog& a, const ThreatCatalog& b) {
  if (a.attacks_.size() != b.attacks_.size() || a.aliases_ != b.aliases_) return false;
  for (std::size_t k = 0; k < a.attacks_.size(); ++k) {
    const auto& x = a.attacks_[k];
    const auto& y = b.attacks_[k];
    if (x.type != y.type || !(x.impact == y.impact) || x.mitigation_by_severity != y.mitigation_by_severity)
      return false;
  }
  for (std::size_t k = 0; k < a.actions_.size(); ++k) {
    const auto& x = a.actions_[k];
    const auto& y = b.actions_[k];
    if (x.type != y.type || !(x.mitigation_impact == y.mitigation_impact) || x.time != y.time ||
        x.price != y.price || x.value != y.value)
      return false;
  }
  return true;
}

Cia attack_impact(const ThreatCatalog& catalog, std::string_view attack_type) {
  return catalog.attack(attack_type).impact;
}

ActionSet mitigation_actions_for(const ThreatCatalog& catalog, std::string_view attack_type, Severity severity) {
  return catalog.attack(attack_type).mitigation(severity);
}

AdaptationActionSpec adaptation_properties(const ThreatCatalog& catalog, ActionType action, const TaskSpec& task,
                                           const BindingContext& binding, bool check_feasible) {
  if (check_feasible && !task.feasible_actions.contains(action))
    throw FeasibilityError(fmt::format("action {} is not feasible for task '{}'", to_string(action), task.id));

  const auto& profile = catalog.action(action);
  const auto& prm = binding.params;
  const auto& primary = binding.primary;
  const bool needs_backup = profile.time == TimeFormula::Backup || profile.time == TimeFormula::MaxBackupPrimary ||
                            profile.price == PriceFormula::Backup || profile.price == PriceFormula::PrimaryPlusBackup;
  if (needs_backup && !binding.backup)
    throw BindingError(fmt::format("task '{}' has no backup service for {}", task.id, to_string(action)));
  const ServiceQuote backup = binding.backup.value_or(ServiceQuote{});

  AdaptationActionSpec out;
  out.action_type = action;
  out.mitigation_impact = profile.mitigation_impact;

  switch (profile.time) {
    case TimeFormula::Zero: out.time = 0.0; break;
    case TimeFormula::NewTask: out.time = prm.new_task_time * primary.time; break;
    case TimeFormula::Switch: out.time = prm.switch_time * primary.time; break;
    case TimeFormula::Backup: out.time = backup.time; break;
    case TimeFormula::MaxBackupPrimary: out.time = std::max(backup.time, primary.time); break;
    case TimeFormula::PrimaryPlusReconfig: out.time = primary.time + prm.reconfig_time * primary.time; break;
  }
  switch (profile.price) {
    case PriceFormula::Zero: out.price = 0.0; break;
    case PriceFormula::NewTask: out.price = prm.new_task_price * primary.price; break;
    case PriceFormula::Primary: out.price = primary.price; break;
    case PriceFormula::Backup: out.price = backup.price; break;
    case PriceFormula::PrimaryPlusBackup: out.price = primary.price + backup.price; break;
    case PriceFormula::PrimaryPlusReconfig: out.price = primary.price + prm.reconfig_price * primary.price; break;
  }
  switch (profile.value) {
    case ValueFormula::Zero: out.value = 0.0; break;
    case ValueFormula::NewTask: out.value = prm.new_task_value * task.value; break;
    case ValueFormula::Switch: out.value = prm.switch_value * task.value; break;
    case ValueFormula::Task: out.value = task.value; break;
    case ValueFormula::TaskPlusRedundancy: out.value = task.value + prm.redundancy_value * task.value; break;
    case ValueFormula::TaskPlusReconfig: out.value = task.value + prm.reconfig_value * task.value; break;
  }
  return out;
}

}  // namespace wfchain
