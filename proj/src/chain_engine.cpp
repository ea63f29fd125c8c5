#include "wfchain/chain_engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_set>

#include "wfchain/error.hpp"

namespace wfchain {

double weighted_total(const Weights& w, double price, double time, double value, double ms) {
  return w.price * price + w.time * time - w.value * value - w.mitigation * ms;
}

ActionTable ActionTable::build(const Workflow& w, const ThreatCatalog& catalog,
                               std::span<const BindingContext> bindings) {
  if (bindings.size() != w.size())
    throw BindingError(fmt::format("{} bindings for {} tasks", bindings.size(), w.size()));
  ActionTable table;
  table.specs_.resize(w.size());
  for (TaskIndex t = 0; t < w.size(); ++t) {
    const auto& task = w.task(t);
    for (auto a : kAllActionTypes) {
      try {
        table.specs_[t][static_cast<std::size_t>(a)] = adaptation_properties(catalog, a, task, bindings[t], false);
      } catch (const BindingError&) {
      }
    }
    table.defaults_.push_back({bindings[t].primary.price, bindings[t].primary.time, task.value, 0.0});
    table.ids_.push_back(task.id);
  }
  return table;
}

ActionTable ActionTable::uniform(const Workflow& w, const ThreatCatalog& catalog, ServiceQuote quote,
                                 const AdaptationParameters& params) {
  std::vector<BindingContext> b(w.size(), BindingContext{quote, quote, params});
  return build(w, catalog, b);
}

const AdaptationActionSpec& ActionTable::spec(TaskIndex t, ActionType a) const {
  const auto& slot = specs_.at(t)[static_cast<std::size_t>(a)];
  if (!slot) throw BindingError(fmt::format("task '{}' has no backup service for {}", ids_.at(t), to_string(a)));
  return *slot;
}

ActionSet feasible_actions(const TaskSpec& task, const ThreatCatalog& catalog, std::string_view attack,
                           Severity severity) {
  return task.feasible_actions & mitigation_actions_for(catalog, attack, severity);
}

namespace {

std::vector<std::pair<TaskIndex, ActionSet>> dependent_action_sets(const Workflow& w,
                                                                   const SecurityDependencyMatrix& sdm,
                                                                   const ThreatCatalog& catalog, const Violation& v) {
  std::vector<std::pair<TaskIndex, ActionSet>> out;
  const auto dt = dependent_tasks(sdm, v.vt);
  for (auto t : w.topological_order()) {
    if (!dt.contains(t)) continue;
    auto acts = feasible_actions(w.task(t), catalog, v.attack, v.severity);
    if (!acts.empty()) out.emplace_back(t, acts);
  }
  return out;
}

}  // namespace

std::size_t chain_count(const Workflow& w, const SecurityDependencyMatrix& sdm, const ThreatCatalog& catalog,
                        const Violation& v) {
  std::size_t prod = 1;
  for (const auto& [t, acts] : dependent_action_sets(w, sdm, catalog, v)) {
    const std::size_t k = acts.size() + 1;
    if (prod > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
    prod *= k;
  }
  return prod - 1;
}

CandidateSet generate_chain_set(const Workflow& w, const SecurityDependencyMatrix& sdm,
                                const ThreatCatalog& catalog, const Violation& v, const GenerationLimits& limits) {
  if (v.vt >= w.size()) throw LookupError(fmt::format("no task index {}", v.vt));
  const auto per_task = dependent_action_sets(w, sdm, catalog, v);
  if (chain_count(w, sdm, catalog, v) > limits.max_chains) {
    auto out = enumerate_by_length(w, per_task, limits.max_chain_length, limits.max_chains);
    out.truncated = true;
    return out;
  }

  std::vector<AdaptationChain> ac;
  for (const auto& [t, acts] : per_task) {
    acts.for_each([&](ActionType a) {
      std::vector<AdaptationChain> next = ac;
      next.push_back(AdaptationChain{{ChainStep{t, a, false}}});
      for (const auto& c : ac) {
        if (c.touches(t)) continue;
        auto extended = c;
        extended.steps.push_back({t, a, false});
        next.push_back(std::move(extended));
      }
      ac = std::move(next);
    });
  }
  sort_canonical(w, ac);
  return {std::move(ac), false};
}

CandidateSet enumerate_by_length(const Workflow& w, std::span<const std::pair<TaskIndex, ActionSet>> per_task,
                                 std::size_t max_length, std::size_t max_chains) {
  CandidateSet out;
  std::vector<std::pair<TaskIndex, std::vector<ActionType>>> tasks;
  for (const auto& [t, acts] : per_task) {
    std::vector<ActionType> list;
    acts.for_each([&](ActionType a) { list.push_back(a); });
    if (!list.empty()) tasks.emplace_back(t, std::move(list));
  }
  std::sort(tasks.begin(), tasks.end(),
            [&](const auto& a, const auto& b) { return w.topo_position(a.first) < w.topo_position(b.first); });

  const std::size_t n = tasks.size();
  const std::size_t top = std::min(max_length, n);
  for (std::size_t len = 1; len <= top; ++len) {
    std::vector<std::size_t> pick(len);
    for (std::size_t k = 0; k < len; ++k) pick[k] = k;
    while (true) {
      std::vector<std::size_t> digit(len, 0);
      while (true) {
        if (out.chains.size() >= max_chains) {
          out.truncated = true;
          return out;
        }
        AdaptationChain c;
        for (std::size_t k = 0; k < len; ++k) c.steps.push_back({tasks[pick[k]].first, tasks[pick[k]].second[digit[k]], false});
        out.chains.push_back(std::move(c));
        bool done = true;
        for (std::size_t pos = len; pos-- > 0;) {
          if (++digit[pos] < tasks[pick[pos]].second.size()) {
            done = false;
            break;
          }
          digit[pos] = 0;
        }
        if (done) break;
      }
      std::size_t k = len;
      while (k > 0 && pick[k - 1] == n - len + (k - 1)) --k;
      if (k == 0) break;
      ++pick[k - 1];
      for (std::size_t j = k; j < len; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  if (top < n) out.truncated = true;
  return out;
}

AdaptationChain expand_chain_loop(const Workflow& w, TaskIndex vt, const AdaptationChain& chain) {
  std::vector<TaskIndex> sps;
  for (const auto& s : chain.steps) {
    const auto pred = w.predecessors(s.task);
    const bool has_member_pred =
        std::any_of(chain.steps.begin(), chain.steps.end(), [&](const ChainStep& o) { return pred.contains(o.task); });
    if (!has_member_pred) sps.push_back(s.task);
  }
  auto steps = chain.steps;
  for (auto sp : sps) {
    for (TaskIndex t : w.topological_order()) {
      if (!w.control_reaches(t, vt) || !w.control_reaches(sp, t)) continue;
      if (std::any_of(steps.begin(), steps.end(), [&](const ChainStep& s) { return s.task == t; })) continue;
      steps.push_back({t, ActionType::Rework, true});
    }
  }
  if (steps.size() == chain.steps.size()) return chain;
  return make_chain(w, std::move(steps));
}

std::vector<AdaptationChain> expand_chain_loops(const Workflow& w, TaskIndex vt,
                                                std::span<const AdaptationChain> chains) {
  std::vector<AdaptationChain> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(expand_chain_loop(w, vt, c));
  sort_canonical(w, out);
  std::unordered_set<std::string> seen;
  std::vector<AdaptationChain> unique;
  unique.reserve(out.size());
  for (auto& c : out)
    if (seen.insert(c.key(w)).second) unique.push_back(std::move(c));
  return unique;
}

std::vector<AdaptationChain> resolve_constraints(std::span<const AdaptationChain> chains,
                                                 std::span<const ChainConstraint> constraints,
                                                 const AdaptationHistory& history, std::size_t n_tasks) {
  std::vector<AdaptationChain> out;
  for (const auto& c : chains) {
    if (constraints.empty() || !any_constraint_matches(constraints, effective_actions(n_tasks, c, history)))
      out.push_back(c);
  }
  return out;
}

double mitigation_score(const Cia& mi, const Cia& req, const Cia& attack, const Cia& dep) {
  return (1.0 - req.c * attack.c) * mi.c * dep.c + (1.0 - req.i * attack.i) * mi.i * dep.i +
         (1.0 - req.a * attack.a) * mi.a * dep.a;
}

double mitigation_score(const AdaptationActionSpec& action, const TaskSpec& task, TaskIndex t, TaskIndex vt,
                        const Cia& attack_impact, const SecurityDependencyMatrix& sdm) {
  return mitigation_score(action.mitigation_impact, task.requirements, attack_impact, sdm.at(vt, t));
}

namespace {

void add(CostTuple& acc, double p, double t, double v, double ms) {
  acc.price += p;
  acc.time += t;
  acc.value += v;
  acc.mitigation_score += ms;
}

void add(CostTuple& acc, const CostTuple& x) { add(acc, x.price, x.time, x.value, x.mitigation_score); }

CostTuple applied_tuple(const AppliedStep& s) {
  return {s.resolved.price, s.resolved.time, s.resolved.value, s.mitigation_score};
}

}  // namespace

ChainEvaluator::ChainEvaluator(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                               const Weights& weights)
    : ctx_(ctx), v_(v), weights_(weights), impact_(attack_impact(ctx.catalog, v.attack)) {
  const auto& w = ctx.workflow;
  if (v.vt >= w.size()) throw LookupError(fmt::format("no task index {}", v.vt));
  in_scope_.assign(w.size(), 0);
  in_scope_[v.vt] = 1;
  const auto prev = history.previous_vt();
  for (TaskIndex t = 0; t < w.size(); ++t) {
    if (!w.control_reaches(t, v.vt)) continue;
    in_scope_[t] = 1;
    if (prev && !w.control_reaches(*prev, t)) continue;
    if (const auto* h = history.latest(t)) add(baseline_, applied_tuple(*h));
    else add(baseline_, ctx.actions.default_cost(t));
  }
  if (const auto* h = history.latest(v.vt)) vt_fallback_ = applied_tuple(*h);
  else vt_fallback_ = ctx.actions.default_cost(v.vt);

  effective_base_ = history.latest_actions(w.size());
}

double ChainEvaluator::step_ms(TaskIndex t, ActionType a) const {
  return mitigation_score(ctx_.actions.spec(t, a), ctx_.workflow.task(t), t, v_.vt, impact_, ctx_.sdm);
}

CostBreakdown ChainEvaluator::cost(const AdaptationChain& chain) const {
  bool blocked = false;
  if (!ctx_.constraints.empty()) {
    auto eff = effective_base_;
    for (const auto& s : chain.steps) eff.at(s.task) = s.action;
    blocked = any_constraint_matches(ctx_.constraints, eff);
  }
  CostTuple acc = baseline_;
  bool touches_vt = false;
  for (const auto& s : chain.steps) {
    if (s.task >= in_scope_.size()) throw LookupError(fmt::format("chain names task index {}", s.task));
    if (!in_scope_[s.task]) continue;
    if (s.task == v_.vt) touches_vt = true;
    const auto& spec = ctx_.actions.spec(s.task, s.action);
    add(acc, spec.price, spec.time, spec.value, step_ms(s.task, s.action));
  }
  if (!touches_vt) add(acc, vt_fallback_);

  CostBreakdown out{acc.price, acc.time, acc.value, acc.mitigation_score, 0.0};
  out.total = blocked ? std::numeric_limits<double>::infinity()
                      : weighted_total(weights_, acc.price, acc.time, acc.value, acc.mitigation_score);
  return out;
}

CostBreakdown chain_cost(const ChainContext& ctx, const AdaptationChain& chain, const AdaptationHistory& history,
                         const Weights& weights, const Violation& v) {
  return ChainEvaluator(ctx, v, history, weights).cost(chain);
}

CandidateSet candidate_chains(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                              const GenerationLimits& limits) {
  auto gen = generate_chain_set(ctx.workflow, ctx.sdm, ctx.catalog, v, limits);
  auto expanded = expand_chain_loops(ctx.workflow, v.vt, gen.chains);
  return {resolve_constraints(expanded, ctx.constraints, history, ctx.workflow.size()), gen.truncated};
}

std::vector<RankedChain> rank_chains(const ChainContext& ctx, std::span<const AdaptationChain> chains,
                                     const AdaptationHistory& history, const Weights& weights, const Violation& v) {
  ChainEvaluator eval(ctx, v, history, weights);
  std::vector<RankedChain> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back({c, eval.cost(c)});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedChain& a, const RankedChain& b) { return a.cost.total < b.cost.total; });
  return out;
}

std::size_t argmin_chain(const ChainEvaluator& eval, std::span<const AdaptationChain> chains) {
  if (chains.empty()) throw NoFeasibleChainError("no candidate chain to choose from");
  std::size_t best = 0;
  double best_total = eval.cost(chains[0]).total;
  for (std::size_t k = 1; k < chains.size(); ++k) {
    const double total = eval.cost(chains[k]).total;
    if (total < best_total) {
      best = k;
      best_total = total;
    }
  }
  return best;
}

RankedChain optimal_chain_exhaustive(const ChainContext& ctx, const Violation& v, const AdaptationHistory& history,
                                     const Weights& weights, const GenerationLimits& limits) {
  auto cands = candidate_chains(ctx, v, history, limits);
  if (cands.truncated) throw SelectionError("chain set was truncated; exhaustive optimum is undefined");
  if (cands.chains.empty())
    throw NoFeasibleChainError(fmt::format("no feasible chain for {} on '{}'", v.attack, ctx.workflow.id_of(v.vt)));
  ChainEvaluator eval(ctx, v, history, weights);
  const auto k = argmin_chain(eval, cands.chains);
  return {cands.chains[k], eval.cost(cands.chains[k])};
}

}  // namespace wfchain
