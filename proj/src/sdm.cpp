#include "wfchain/sdm.hpp"

#include <fmt/format.h>

#include "wfchain/error.hpp"

namespace wfchain {

SecurityDependencyMatrix::SecurityDependencyMatrix(std::vector<std::string> task_order, std::vector<Cia> entries)
    : order_(std::move(task_order)), entries_(std::move(entries)) {
  if (entries_.size() != order_.size() * order_.size())
    throw ValidationError("SDM: entry count does not match task count squared");
}

TaskIndex SecurityDependencyMatrix::index_of(std::string_view task_id) const {
  for (TaskIndex k = 0; k < order_.size(); ++k)
    if (order_[k] == task_id) return k;
  throw LookupError(fmt::format("SDM has no task '{}'", task_id));
}

const Cia& SecurityDependencyMatrix::at(std::string_view row, std::string_view col) const {
  return at(index_of(row), index_of(col));
}

std::string SecurityDependencyMatrix::to_csv() const {
  std::string out;
  for (const auto& id : order_) out += "," + id;
  out += "\n";
  for (TaskIndex r = 0; r < size(); ++r) {
    out += order_[r];
    for (TaskIndex c = 0; c < size(); ++c) out += "," + to_string(at(r, c));
    out += "\n";
  }
  return out;
}

namespace {

// Product of `pick` over every task lying on some directed path from `from` to
// `to` (both inclusive) under the reachability predicate `reaches`.
template <typename Reach, typename Pick>
double path_product(const Workflow& w, TaskIndex from, TaskIndex to, Reach reaches, Pick pick) {
  double p = pick(w.task(from)) * pick(w.task(to));
  for (TaskIndex k = 0; k < w.size(); ++k)
    if (k != from && k != to && reaches(from, k) && reaches(k, to)) p *= pick(w.task(k));
  return p;
}

}  // namespace

SecurityDependencyMatrix compute_sdm(const Workflow& w) {
  const auto n = w.size();
  std::vector<Cia> m(n * n);
  auto data = [&](TaskIndex a, TaskIndex b) { return w.data_reaches(a, b); };
  auto ctrl = [&](TaskIndex a, TaskIndex b) { return w.control_reaches(a, b); };
  auto conf = [](const TaskSpec& t) { return t.requirements.c; };
  auto integ = [](const TaskSpec& t) { return t.requirements.i; };
  auto avail = [](const TaskSpec& t) { return t.requirements.a; };

  for (TaskIndex i = 0; i < n; ++i) {
    for (TaskIndex j = 0; j < n; ++j) {
      Cia& e = m[i * n + j];
      if (i == j) {
        e = {1.0, 1.0, 1.0};
        continue;
      }
      const bool fwd_data = w.data_reaches(i, j);
      const bool bwd_data = w.data_reaches(j, i);
      const bool fwd_ctrl = w.control_reaches(i, j);
      if (fwd_data) e.c = path_product(w, i, j, data, conf);
      else if (bwd_data) e.c = path_product(w, j, i, data, conf);
      if (fwd_data || fwd_ctrl) {
        // Integrity follows data or control paths; a task on either kind counts.
        double p = integ(w.task(i)) * integ(w.task(j));
        for (TaskIndex k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const bool on_data = fwd_data && data(i, k) && data(k, j);
          const bool on_ctrl = fwd_ctrl && ctrl(i, k) && ctrl(k, j);
          if (on_data || on_ctrl) p *= integ(w.task(k));
        }
        e.i = p;
      }
      if (fwd_data) e.a = path_product(w, i, j, data, avail);
    }
  }
  std::vector<std::string> order;
  for (const auto& t : w.tasks()) order.push_back(t.id);
  return SecurityDependencyMatrix(std::move(order), std::move(m));
}

TaskSet dependent_tasks(const SecurityDependencyMatrix& sdm, TaskIndex vt) {
  if (vt >= sdm.size()) throw LookupError(fmt::format("SDM has no task index {}", vt));
  TaskSet out;
  for (TaskIndex t = 0; t < sdm.size(); ++t)
    if (!sdm.at(vt, t).is_zero()) out.insert(t);
  out.insert(vt);
  return out;
}

std::set<std::string> dependent_tasks(const SecurityDependencyMatrix& sdm, std::string_view vt) {
  std::set<std::string> out;
  for (auto t : dependent_tasks(sdm, sdm.index_of(vt))) out.insert(sdm.task_order()[t]);
  return out;
}

}  // namespace wfchain
