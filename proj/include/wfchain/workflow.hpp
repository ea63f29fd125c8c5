#pragma once

#include <nlohmann/json_fwd.hpp>

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wfchain/types.hpp"

namespace wfchain {

using TaskSet = std::set<TaskIndex>;

struct TaskSpec {
  std::string id;
  Cia requirements;  // C, I, A in [0,1]
  double value = 0.0;
  ActionSet feasible_actions;
};

struct DataItem {
  std::string id;
  std::string label;
};

struct ControlEdge {
  TaskIndex source = 0;
  TaskIndex target = 0;
  std::string guard;  // retained for export, ignored by closures
};

struct DataEdge {
  TaskIndex source = 0;
  TaskIndex target = 0;
  std::size_t data_item = 0;
};

// Edge as written in a document, endpoints by id.
struct EdgeSpec {
  std::string source;
  std::string target;
  std::string label;  // guard for control edges, data item id for data edges
};

// Immutable workflow DAG. Closures and the topological order are computed once
// at construction; all accessors are const and safe to share across threads.
class Workflow {
 public:
  // Validates every invariant; throws ValidationError (cycle, dangling ids,
  // duplicate ids, out-of-range attributes).
  static Workflow build(std::string id, std::vector<TaskSpec> tasks,
                        std::vector<DataItem> data_items,
                        const std::vector<EdgeSpec>& control_edges,
                        const std::vector<EdgeSpec>& data_edges);

  const std::string& id() const { return id_; }
  std::size_t size() const { return tasks_.size(); }
  std::span<const TaskSpec> tasks() const { return tasks_; }
  const TaskSpec& task(TaskIndex t) const { return tasks_.at(t); }
  std::span<const DataItem> data_items() const { return data_items_; }
  std::span<const ControlEdge> control_edges() const { return control_edges_; }
  std::span<const DataEdge> data_edges() const { return data_edges_; }

  TaskIndex index_of(std::string_view task_id) const;  // LookupError if unknown
  bool contains(std::string_view task_id) const;
  const std::string& id_of(TaskIndex t) const { return tasks_.at(t).id; }

  std::span<const TaskIndex> direct_control_predecessors(TaskIndex t) const { return ctrl_in_.at(t); }
  std::span<const TaskIndex> direct_control_successors(TaskIndex t) const { return ctrl_out_.at(t); }

  // Deterministic Kahn order, ties broken by declaration order.
  std::span<const TaskIndex> topological_order() const { return topo_; }
  std::size_t topo_position(TaskIndex t) const { return topo_pos_.at(t); }

  // O(1) closure membership: is `to` reachable from `from` by forward edges?
  bool data_reaches(TaskIndex from, TaskIndex to) const { return data_reach_[from * size() + to] != 0; }
  bool control_reaches(TaskIndex from, TaskIndex to) const { return ctrl_reach_[from * size() + to] != 0; }

  TaskSet data_flow_closure(TaskIndex t) const;     // DFCS, excludes t
  TaskSet control_flow_closure(TaskIndex t) const;  // CFCS, excludes t
  TaskSet predecessors(TaskIndex t) const;          // transitive control predecessors
  TaskSet successors(TaskIndex t) const;            // == control_flow_closure

  std::set<std::string> ids(const TaskSet& set) const;

 private:
  Workflow() = default;

  std::string id_;
  std::vector<TaskSpec> tasks_;
  std::vector<DataItem> data_items_;
  std::vector<ControlEdge> control_edges_;
  std::vector<DataEdge> data_edges_;
  std::unordered_map<std::string, TaskIndex> index_;
  std::vector<std::vector<TaskIndex>> ctrl_in_;
  std::vector<std::vector<TaskIndex>> ctrl_out_;
  std::vector<TaskIndex> topo_;
  std::vector<std::size_t> topo_pos_;
  std::vector<std::uint8_t> data_reach_;
  std::vector<std::uint8_t> ctrl_reach_;
};

// Document form: { "id", "tasks": [{id,c,i,a,value,actions}], "data_items": [..],
// "control_edges": [[src,dst,guard?]], "data_edges": [[src,dst,data_id]],
// "gateways": [ids]? }. Control edges may route through gateway ids; they are
// flattened into task-to-task edges keeping the guard of the final hop.
Workflow parse_workflow(const nlohmann::json& doc);
Workflow parse_workflow(std::string_view text);
Workflow load_workflow(const std::string& path);
nlohmann::json to_json(const Workflow& w);

// Id-based conveniences over the member closures.
std::set<std::string> data_flow_closure(const Workflow& w, std::string_view task_id);
std::set<std::string> control_flow_closure(const Workflow& w, std::string_view task_id);
std::set<std::string> predecessors(const Workflow& w, std::string_view task_id);
std::set<std::string> successors(const Workflow& w, std::string_view task_id);

}  // namespace wfchain
