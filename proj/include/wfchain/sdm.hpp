#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wfchain/types.hpp"
#include "wfchain/workflow.hpp"

namespace wfchain {

// Square task x task matrix of (C, I, A) dependency triples. Row i, column j
// holds the effect of security measures taken at task i on task j.
class SecurityDependencyMatrix {
 public:
  SecurityDependencyMatrix(std::vector<std::string> task_order, std::vector<Cia> entries);

  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& task_order() const { return order_; }
  const Cia& at(TaskIndex row, TaskIndex col) const { return entries_[row * size() + col]; }
  const Cia& at(std::string_view row, std::string_view col) const;
  TaskIndex index_of(std::string_view task_id) const;

  // CSV: header row/column of task ids, cells "c|i|a".
  std::string to_csv() const;

 private:
  std::vector<std::string> order_;
  std::vector<Cia> entries_;
};

SecurityDependencyMatrix compute_sdm(const Workflow& w);

// Tasks whose row entry from vt is nonzero: { t | SDM[vt][t] != (0,0,0) }.
// Always contains vt itself.
TaskSet dependent_tasks(const SecurityDependencyMatrix& sdm, TaskIndex vt);
std::set<std::string> dependent_tasks(const SecurityDependencyMatrix& sdm, std::string_view vt);

}  // namespace wfchain
