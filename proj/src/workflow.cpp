#include "wfchain/workflow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <unordered_set>

#include "json_util.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

namespace {

using detail::json;

// Returns one directed cycle (as ids, first node repeated at the end) or empty.
std::vector<std::string> find_cycle(const std::vector<TaskSpec>& tasks,
                                    const std::vector<std::vector<TaskIndex>>& out) {
  enum class Mark : std::uint8_t { White, Grey, Black };
  std::vector<Mark> mark(tasks.size(), Mark::White);
  std::vector<TaskIndex> stack;
  std::vector<std::string> cycle;

  std::function<bool(TaskIndex)> visit = [&](TaskIndex u) {
    mark[u] = Mark::Grey;
    stack.push_back(u);
    for (auto v : out[u]) {
      if (mark[v] == Mark::Grey) {
        auto it = std::find(stack.begin(), stack.end(), v);
        for (; it != stack.end(); ++it) cycle.push_back(tasks[*it].id);
        cycle.push_back(tasks[v].id);
        return true;
      }
      if (mark[v] == Mark::White && visit(v)) return true;
    }
    stack.pop_back();
    mark[u] = Mark::Black;
    return false;
  };
  for (TaskIndex u = 0; u < tasks.size(); ++u)
    if (mark[u] == Mark::White && visit(u)) break;
  return cycle;
}

void transitive_closure(std::size_t n, const std::vector<std::vector<TaskIndex>>& out,
                        std::span<const TaskIndex> topo, std::vector<std::uint8_t>& reach) {
  reach.assign(n * n, 0);
  // Reverse topological sweep: reach(u) = out(u) ∪ reach(out(u)).
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    auto u = *it;
    for (auto v : out[u]) {
      reach[u * n + v] = 1;
      for (std::size_t k = 0; k < n; ++k)
        if (reach[v * n + k]) reach[u * n + k] = 1;
    }
  }
}

}  // namespace

Workflow Workflow::build(std::string id, std::vector<TaskSpec> tasks, std::vector<DataItem> data_items,
                         const std::vector<EdgeSpec>& control_edges, const std::vector<EdgeSpec>& data_edges) {
  Workflow w;
  w.id_ = std::move(id);
  w.tasks_ = std::move(tasks);
  w.data_items_ = std::move(data_items);

  if (w.tasks_.empty()) throw ValidationError(fmt::format("workflow '{}': no tasks", w.id_));
  for (TaskIndex t = 0; t < w.tasks_.size(); ++t) {
    const auto& spec = w.tasks_[t];
    if (!w.index_.emplace(spec.id, t).second)
      throw ValidationError(fmt::format("duplicate task id '{}'", spec.id));
    if (!spec.requirements.within_unit())
      throw ValidationError(fmt::format("task '{}': C, I, A must lie in [0,1]", spec.id));
    if (spec.value < 0) throw ValidationError(fmt::format("task '{}': value must be nonnegative", spec.id));
  }

  std::unordered_map<std::string, std::size_t> data_index;
  for (std::size_t d = 0; d < w.data_items_.size(); ++d)
    if (!data_index.emplace(w.data_items_[d].id, d).second)
      throw ValidationError(fmt::format("duplicate data item id '{}'", w.data_items_[d].id));

  auto endpoint = [&](const std::string& tid, std::string_view kind) {
    auto it = w.index_.find(tid);
    if (it == w.index_.end())
      throw ValidationError(fmt::format("{} edge references unknown task '{}'", kind, tid));
    return it->second;
  };

  const auto n = w.tasks_.size();
  w.ctrl_in_.assign(n, {});
  w.ctrl_out_.assign(n, {});
  std::vector<std::vector<TaskIndex>> data_out(n);

  std::set<std::pair<TaskIndex, TaskIndex>> seen;
  for (const auto& e : control_edges) {
    auto s = endpoint(e.source, "control");
    auto d = endpoint(e.target, "control");
    if (!seen.emplace(s, d).second) continue;
    w.control_edges_.push_back({s, d, e.label});
    w.ctrl_out_[s].push_back(d);
    w.ctrl_in_[d].push_back(s);
  }
  for (const auto& e : data_edges) {
    auto s = endpoint(e.source, "data");
    auto d = endpoint(e.target, "data");
    auto it = data_index.find(e.label);
    if (it == data_index.end())
      throw ValidationError(fmt::format("data edge {}->{} references unknown data item '{}'", e.source,
                                        e.target, e.label));
    w.data_edges_.push_back({s, d, it->second});
    data_out[s].push_back(d);
  }

  if (auto cycle = find_cycle(w.tasks_, w.ctrl_out_); !cycle.empty())
    throw ValidationError(fmt::format("control flow contains a cycle: {}", fmt::join(cycle, " -> ")));
  if (auto cycle = find_cycle(w.tasks_, data_out); !cycle.empty())
    throw ValidationError(fmt::format("data flow contains a cycle: {}", fmt::join(cycle, " -> ")));

  // Kahn with a min-heap on declaration index.
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : w.control_edges_) ++indeg[e.target];
  std::priority_queue<TaskIndex, std::vector<TaskIndex>, std::greater<>> ready;
  for (TaskIndex t = 0; t < n; ++t)
    if (indeg[t] == 0) ready.push(t);
  while (!ready.empty()) {
    auto u = ready.top();
    ready.pop();
    w.topo_.push_back(u);
    for (auto v : w.ctrl_out_[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  w.topo_pos_.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) w.topo_pos_[w.topo_[p]] = p;

  // Data edges need not follow control order, so sort them separately.
  std::vector<TaskIndex> data_topo;
  {
    std::vector<std::size_t> din(n, 0);
    for (const auto& e : w.data_edges_) ++din[e.target];
    std::priority_queue<TaskIndex, std::vector<TaskIndex>, std::greater<>> q;
    for (TaskIndex t = 0; t < n; ++t)
      if (din[t] == 0) q.push(t);
    while (!q.empty()) {
      auto u = q.top();
      q.pop();
      data_topo.push_back(u);
      for (auto v : data_out[u])
        if (--din[v] == 0) q.push(v);
    }
  }
  transitive_closure(n, w.ctrl_out_, w.topo_, w.ctrl_reach_);
  transitive_closure(n, data_out, data_topo, w.data_reach_);
  return w;
}

TaskIndex Workflow::index_of(std::string_view task_id) const {
  auto it = index_.find(std::string(task_id));
  if (it == index_.end()) throw LookupError(fmt::format("unknown task '{}' in workflow '{}'", task_id, id_));
  return it->second;
}

bool Workflow::contains(std::string_view task_id) const { return index_.contains(std::string(task_id)); }

TaskSet Workflow::data_flow_closure(TaskIndex t) const {
  TaskSet out;
  for (TaskIndex j = 0; j < size(); ++j)
    if (j != t && data_reaches(t, j)) out.insert(j);
  return out;
}

TaskSet Workflow::control_flow_closure(TaskIndex t) const {
  TaskSet out;
  for (TaskIndex j = 0; j < size(); ++j)
    if (j != t && control_reaches(t, j)) out.insert(j);
  return out;
}

TaskSet Workflow::predecessors(TaskIndex t) const {
  TaskSet out;
  for (TaskIndex j = 0; j < size(); ++j)
    if (j != t && control_reaches(j, t)) out.insert(j);
  return out;
}

TaskSet Workflow::successors(TaskIndex t) const { return control_flow_closure(t); }

std::set<std::string> Workflow::ids(const TaskSet& set) const {
  std::set<std::string> out;
  for (auto t : set) out.insert(id_of(t));
  return out;
}

std::set<std::string> data_flow_closure(const Workflow& w, std::string_view task_id) {
  return w.ids(w.data_flow_closure(w.index_of(task_id)));
}
std::set<std::string> control_flow_closure(const Workflow& w, std::string_view task_id) {
  return w.ids(w.control_flow_closure(w.index_of(task_id)));
}
std::set<std::string> predecessors(const Workflow& w, std::string_view task_id) {
  return w.ids(w.predecessors(w.index_of(task_id)));
}
std::set<std::string> successors(const Workflow& w, std::string_view task_id) {
  return w.ids(w.successors(w.index_of(task_id)));
}

// ---------------------------------------------------------------------------
// JSON

Workflow parse_workflow(const json& doc) {
  using namespace detail;
  const std::string root;
  auto id = string_field(doc, "id", root);

  std::vector<TaskSpec> tasks;
  const auto& jtasks = as_array(require(doc, "tasks", root), "tasks");
  for (std::size_t k = 0; k < jtasks.size(); ++k) {
    const auto path = child("tasks", k);
    const auto& jt = jtasks[k];
    TaskSpec spec;
    spec.id = string_field(jt, "id", path);
    spec.requirements = {number_field(jt, "c", path), number_field(jt, "i", path), number_field(jt, "a", path)};
    for (auto [key, v] : {std::pair{"c", spec.requirements.c}, {"i", spec.requirements.i}, {"a", spec.requirements.a}})
      if (v < 0.0 || v > 1.0) throw ValidationError(fmt::format("{}: must lie in [0,1], got {}", child(path, key), v));
    spec.value = number_field_or(jt, "value", 0.0, path);
    if (spec.value < 0.0) throw ValidationError(fmt::format("{}: must be nonnegative", child(path, "value")));
    if (auto it = jt.find("actions"); it != jt.end()) {
      const auto apath = child(path, "actions");
      as_array(*it, apath);
      for (std::size_t a = 0; a < it->size(); ++a) {
        auto name = as_string((*it)[a], child(apath, a));
        auto type = parse_action_type(name);
        if (!type) throw ParseError(fmt::format("{}: unknown action type '{}'", child(apath, a), name));
        spec.feasible_actions.insert(*type);
      }
    }
    tasks.push_back(std::move(spec));
  }

  std::vector<DataItem> items;
  if (auto it = doc.find("data_items"); it != doc.end()) {
    as_array(*it, "data_items");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& jd = (*it)[k];
      const auto path = child("data_items", k);
      if (jd.is_string()) {
        items.push_back({jd.get<std::string>(), jd.get<std::string>()});
      } else {
        DataItem d{string_field(jd, "id", path), ""};
        d.label = jd.contains("label") ? string_field(jd, "label", path) : d.id;
        items.push_back(std::move(d));
      }
    }
  }

  auto read_edges = [&](std::string_view key, bool label_required) {
    std::vector<EdgeSpec> edges;
    auto it = doc.find(std::string(key));
    if (it == doc.end()) return edges;
    const std::string base(key);
    as_array(*it, base);
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto path = child(base, k);
      const auto& je = (*it)[k];
      if (!je.is_array() || je.size() < 2 || je.size() > 3)
        throw ParseError(fmt::format("{}: expected [source, target{}]", path, label_required ? ", data_id" : ", guard?"));
      if (label_required && je.size() != 3) throw ParseError(fmt::format("{}: missing data item id", path));
      EdgeSpec e{as_string(je[0], child(path, 0)), as_string(je[1], child(path, 1)), ""};
      if (je.size() == 3 && !je[2].is_null()) e.label = as_string(je[2], child(path, 2));
      edges.push_back(std::move(e));
    }
    return edges;
  };
  auto control = read_edges("control_edges", false);
  auto data = read_edges("data_edges", true);

  std::unordered_set<std::string> gateways;
  if (auto it = doc.find("gateways"); it != doc.end()) {
    as_array(*it, "gateways");
    for (std::size_t k = 0; k < it->size(); ++k) gateways.insert(as_string((*it)[k], child("gateways", k)));
  }
  if (!gateways.empty()) {
    // Flatten task -> gw -> ... -> task paths into direct edges.
    std::map<std::string, std::vector<const EdgeSpec*>> out;
    for (const auto& e : control) out[e.source].push_back(&e);
    std::vector<EdgeSpec> flat;
    for (const auto& e : control) {
      if (gateways.contains(e.source)) continue;
      std::vector<const EdgeSpec*> frontier{&e};
      std::set<std::string> visited;
      while (!frontier.empty()) {
        const auto* cur = frontier.back();
        frontier.pop_back();
        if (!gateways.contains(cur->target)) {
          flat.push_back({e.source, cur->target, cur->label.empty() ? e.label : cur->label});
          continue;
        }
        if (!visited.insert(cur->target).second) continue;
        for (const auto* next : out[cur->target]) frontier.push_back(next);
      }
    }
    control = std::move(flat);
  }

  return Workflow::build(std::move(id), std::move(tasks), std::move(items), control, data);
}

Workflow parse_workflow(std::string_view text) { return parse_workflow(detail::parse_text(text, "workflow")); }

Workflow load_workflow(const std::string& path) { return parse_workflow(detail::read_json_file(path)); }

json to_json(const Workflow& w) {
  json doc;
  doc["id"] = w.id();
  doc["tasks"] = json::array();
  for (const auto& t : w.tasks()) {
    json actions = json::array();
    t.feasible_actions.for_each([&](ActionType a) { actions.push_back(std::string(to_string(a))); });
    doc["tasks"].push_back({{"id", t.id},
                            {"c", t.requirements.c},
                            {"i", t.requirements.i},
                            {"a", t.requirements.a},
                            {"value", t.value},
                            {"actions", actions}});
  }
  doc["data_items"] = json::array();
  for (const auto& d : w.data_items()) doc["data_items"].push_back({{"id", d.id}, {"label", d.label}});
  doc["control_edges"] = json::array();
  for (const auto& e : w.control_edges()) {
    json edge = json::array({w.id_of(e.source), w.id_of(e.target)});
    if (!e.guard.empty()) edge.push_back(e.guard);
    doc["control_edges"].push_back(edge);
  }
  doc["data_edges"] = json::array();
  for (const auto& e : w.data_edges())
    doc["data_edges"].push_back({w.id_of(e.source), w.id_of(e.target), w.data_items()[e.data_item].id});
  return doc;
}

}  // namespace wfchain
