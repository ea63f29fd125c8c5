#include "wfchain/chain.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "json_util.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

const ChainStep* AdaptationChain::step_for(TaskIndex t) const {
  for (const auto& s : steps)
    if (s.task == t) return &s;
  return nullptr;
}

std::string AdaptationChain::key(const Workflow& w) const {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += '|';
    out += w.id_of(s.task);
    out += ':';
    out += to_string(s.action);
  }
  return out;
}

AdaptationChain make_chain(const Workflow& w, std::vector<ChainStep> steps) {
  std::sort(steps.begin(), steps.end(), [&](const ChainStep& a, const ChainStep& b) {
    return w.topo_position(a.task) < w.topo_position(b.task);
  });
  for (std::size_t k = 1; k < steps.size(); ++k)
    if (steps[k].task == steps[k - 1].task)
      throw ValidationError(fmt::format("chain names task '{}' twice", w.id_of(steps[k].task)));
  return AdaptationChain{std::move(steps)};
}

AdaptationChain parse_chain_key(const Workflow& w, const ThreatCatalog& catalog, std::string_view key) {
  std::vector<ChainStep> steps;
  std::size_t pos = 0;
  while (pos <= key.size() && !key.empty()) {
    auto bar = key.find('|', pos);
    auto part = key.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos);
    auto colon = part.find(':');
    if (colon == std::string_view::npos) throw ParseError(fmt::format("chain key '{}': step '{}' lacks ':'", key, part));
    steps.push_back({w.index_of(part.substr(0, colon)), catalog.resolve_action_name(part.substr(colon + 1)), false});
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  if (steps.empty()) throw ParseError("empty chain key");
  return make_chain(w, std::move(steps));
}

bool canonical_less(const Workflow& w, const AdaptationChain& a, const AdaptationChain& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto pa = w.topo_position(a.steps[k].task);
    auto pb = w.topo_position(b.steps[k].task);
    if (pa != pb) return pa < pb;
  }
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.steps[k].action != b.steps[k].action) return a.steps[k].action < b.steps[k].action;
  return false;
}

void sort_canonical(const Workflow& w, std::vector<AdaptationChain>& chains) {
  std::stable_sort(chains.begin(), chains.end(),
                   [&](const AdaptationChain& a, const AdaptationChain& b) { return canonical_less(w, a, b); });
}

ChainConstraint parse_constraint(const Workflow& w, const ThreatCatalog& catalog, const nlohmann::json& doc,
                                 const std::string& path) {
  using namespace detail;
  ChainConstraint c;
  auto kind = string_field(doc, "kind", path);
  if (kind == "conflict" || kind == "conflicting") c.kind = ChainConstraint::Kind::Conflicting;
  else if (kind == "essential") c.kind = ChainConstraint::Kind::Essential;
  else throw ParseError(fmt::format("{}.kind: expected 'conflict' or 'essential', got '{}'", path, kind));

  auto side = [&](std::string_view key, TaskIndex& task, ActionType& action) {
    const auto p = child(path, key);
    const auto& v = require(doc, key, path);
    if (!v.is_array() || v.size() != 2) throw ParseError(fmt::format("{}: expected [task, action]", p));
    auto tid = as_string(v[0], child(p, 0));
    if (!w.contains(tid)) throw ValidationError(fmt::format("{}: unknown task '{}'", p, tid));
    task = w.index_of(tid);
    try {
      action = catalog.resolve_action_name(as_string(v[1], child(p, 1)));
    } catch (const CatalogError& e) {
      throw ParseError(fmt::format("{}: {}", child(p, 1), e.what()));
    }
  };
  side("left", c.left_task, c.left_action);
  side("right", c.right_task, c.right_action);
  if (c.left_task == c.right_task && c.left_action == c.right_action)
    throw ValidationError(fmt::format("{}: left and right name the same action", path));
  return c;
}

nlohmann::json to_json(const Workflow& w, const ChainConstraint& c) {
  return {{"kind", c.kind == ChainConstraint::Kind::Conflicting ? "conflict" : "essential"},
          {"left", {w.id_of(c.left_task), std::string(to_string(c.left_action))}},
          {"right", {w.id_of(c.right_task), std::string(to_string(c.right_action))}}};
}

std::optional<TaskIndex> AdaptationHistory::previous_vt() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().vt;
}

const AppliedStep* AdaptationHistory::latest(TaskIndex t) const {
  for (auto e = entries_.rbegin(); e != entries_.rend(); ++e)
    for (const auto& s : e->steps)
      if (s.task == t) return &s;
  return nullptr;
}

std::vector<std::optional<ActionType>> AdaptationHistory::latest_actions(std::size_t n_tasks) const {
  std::vector<std::optional<ActionType>> out(n_tasks);
  for (const auto& e : entries_)
    for (const auto& s : e.steps)
      if (s.task < n_tasks) out[s.task] = s.action;
  return out;
}

void AdaptationHistory::commit(HistoryEntry entry) {
  const bool acts_on_vt = std::any_of(entry.steps.begin(), entry.steps.end(),
                                      [&](const AppliedStep& s) { return s.task == entry.vt; });
  if (acts_on_vt) {
    for (auto& old : entries_)
      std::erase_if(old.steps, [&](const AppliedStep& s) { return s.task == entry.vt; });
  }
  entries_.push_back(std::move(entry));
}

std::vector<std::optional<ActionType>> effective_actions(std::size_t n_tasks, const AdaptationChain& chain,
                                                         const AdaptationHistory& history) {
  auto out = history.latest_actions(n_tasks);
  for (const auto& s : chain.steps) out.at(s.task) = s.action;
  return out;
}

bool constraint_matches(const ChainConstraint& c, std::span<const std::optional<ActionType>> effective) {
  auto has = [&](TaskIndex t, ActionType a) { return t < effective.size() && effective[t] == a; };
  const bool left = has(c.left_task, c.left_action);
  const bool right = has(c.right_task, c.right_action);
  if (c.kind == ChainConstraint::Kind::Conflicting) return left && right;
  return left && !right;
}

bool any_constraint_matches(std::span<const ChainConstraint> constraints,
                            std::span<const std::optional<ActionType>> effective) {
  return std::any_of(constraints.begin(), constraints.end(),
                     [&](const ChainConstraint& c) { return constraint_matches(c, effective); });
}

}  // namespace wfchain
