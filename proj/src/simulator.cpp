#include "wfchain/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>

#include "wfchain/error.hpp"

namespace wfchain {

using nlohmann::json;

std::vector<Binding> bind_services(const Scenario& s) {
  const auto& w = s.workflow;
  std::vector<Binding> out(w.size());
  for (TaskIndex t = 0; t < w.size(); ++t) {
    std::vector<std::size_t> cands = t < s.candidates.size() ? s.candidates[t] : std::vector<std::size_t>{};
    if (cands.empty()) throw BindingError(fmt::format("task '{}' has no candidate service", w.id_of(t)));
    const auto& sv = s.services;
    switch (s.binding_policy.kind) {
      case BindingPolicy::Kind::Cheapest:
        std::stable_sort(cands.begin(), cands.end(), [&](std::size_t a, std::size_t b) {
          return std::tie(sv[a].price, sv[a].time) < std::tie(sv[b].price, sv[b].time);
        });
        break;
      case BindingPolicy::Kind::Fastest:
        std::stable_sort(cands.begin(), cands.end(), [&](std::size_t a, std::size_t b) {
          return std::tie(sv[a].time, sv[a].price) < std::tie(sv[b].time, sv[b].price);
        });
        break;
      case BindingPolicy::Kind::Random: {
        Rng rng(derive_seed(s.binding_policy.seed, kBindingStream, t));
        for (std::size_t k = cands.size(); k > 1; --k) std::swap(cands[k - 1], cands[rng.below(k)]);
        break;
      }
    }
    out[t].primary = cands[0];
    out[t].backup = cands.size() > 1 ? cands[1] : cands[0];
    out[t].degenerate = cands.size() == 1;
  }
  return out;
}

std::vector<BindingContext> binding_contexts(const Scenario& s, std::span<const Binding> bindings) {
  std::vector<BindingContext> out;
  out.reserve(bindings.size());
  for (TaskIndex t = 0; t < bindings.size(); ++t) {
    const auto& p = s.services[bindings[t].primary];
    const auto& b = s.services[bindings[t].backup];
    out.push_back({{p.price, p.time}, ServiceQuote{b.price, b.time}, s.params_for(t)});
  }
  return out;
}

std::string_view to_string(ViolationOutcome o) {
  switch (o) {
    case ViolationOutcome::Pending: return "pending";
    case ViolationOutcome::Adapted: return "adapted";
    case ViolationOutcome::BelowThreshold: return "below_threshold";
    case ViolationOutcome::Unhandled: return "unhandled";
    case ViolationOutcome::NoResponse: return "no_response";
  }
  return "pending";
}

std::vector<ViolationEvent> inject_attacks(const Scenario& s, std::span<const Binding> bindings, Rng& rng,
                                           double attack_rate) {
  std::vector<ViolationEvent> out;
  for (TaskIndex t : s.workflow.topological_order()) {
    const auto& svc = s.services[bindings[t].primary];
    const double total = svc.total_afr();
    const double u_hit = rng.uniform();
    const double u_type = rng.uniform();
    const double u_score = rng.uniform();
    const double p = std::min(1.0, attack_rate * total);
    if (!(u_hit < p)) continue;
    const double target = u_type * total;
    double acc = 0.0;
    std::string type;
    for (const auto& [name, rate] : svc.afr) {
      if (rate <= 0.0) continue;
      type = name;
      acc += rate;
      if (target < acc) break;
    }
    ViolationEvent ev;
    ev.task = t;
    ev.attack = type;
    ev.score = u_score;
    ev.severity = severity_from_score(u_score);
    out.push_back(std::move(ev));
  }
  return out;
}

Strategy parse_strategy(std::string_view name) {
  if (name == "none") return Strategy::None;
  if (name == "single") return Strategy::Single;
  if (name == "chain") return Strategy::Chain;
  if (name == "oracle" || name == "chain_oracle") return Strategy::Oracle;
  throw ConfigError(fmt::format("unknown strategy '{}'", name));
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::Single: return "single";
    case Strategy::Chain: return "chain";
    case Strategy::Oracle: return "oracle";
  }
  return "none";
}

std::optional<std::size_t> ArgminResponder::choose(const Decision& d) {
  if (d.candidates.empty()) return std::nullopt;
  return argmin_chain(d.evaluator, d.candidates);
}

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Completed: return "completed";
    case TaskStatus::Adapted: return "adapted";
    case TaskStatus::Reworked: return "reworked";
    case TaskStatus::Skipped: return "skipped";
  }
  return "completed";
}

CostBreakdown fold_totals(std::span<const TaskRecord> records, const Weights& w) {
  CostBreakdown c;
  for (const auto& r : records) {
    c.price += r.price;
    c.value += r.value;
    c.mitigation_score += r.mitigation_score;
    c.time = std::max(c.time, r.end);
  }
  c.total = weighted_total(w, c.price, c.time, c.value, c.mitigation_score);
  return c;
}

json to_json(const Workflow& w, const ExecutionTrace& t) {
  json recs = json::array();
  for (const auto& r : t.records) {
    json jr = {{"task", w.id_of(r.task)},
               {"service", r.service},
               {"start", r.start},
               {"end", r.end},
               {"price", r.price},
               {"value", r.value},
               {"ms", r.mitigation_score},
               {"status", std::string(to_string(r.status))}};
    if (r.action) jr["action"] = std::string(to_string(*r.action));
    if (r.unintentional) jr["unintentional"] = true;
    recs.push_back(std::move(jr));
  }
  json viols = json::array();
  for (const auto& v : t.violations) {
    json jv = {{"task", w.id_of(v.task)},
               {"attack", v.attack},
               {"severity", std::string(to_string(v.severity))},
               {"score", v.score},
               {"detected_at", v.detected_at},
               {"outcome", std::string(to_string(v.outcome))}};
    if (!v.chain.empty()) jv["chain"] = v.chain;
    viols.push_back(std::move(jv));
  }
  return {{"instance", t.instance},
          {"records", recs},
          {"violations", viols},
          {"chains_applied", t.chains_applied},
          {"totals",
           {{"price", t.totals.price},
            {"time", t.totals.time},
            {"value", t.totals.value},
            {"ms", t.totals.mitigation_score},
            {"total", t.totals.total}}}};
}

Simulator::Simulator(const Scenario& s)
    : s_(s),
      bindings_(bind_services(s)),
      sdm_(compute_sdm(s.workflow)),
      actions_(ActionTable::build(s.workflow, s.catalog, binding_contexts(s, bindings_))) {}

std::vector<ViolationEvent> Simulator::schedule(std::uint64_t master_seed, std::size_t instance,
                                                double attack_rate) const {
  if (!s_.scripted.empty()) {
    std::vector<ViolationEvent> out;
    for (const auto& sv : s_.scripted) {
      ViolationEvent ev;
      ev.task = sv.task;
      ev.attack = sv.attack;
      ev.severity = sv.severity;
      ev.score = sv.score;
      out.push_back(std::move(ev));
    }
    std::stable_sort(out.begin(), out.end(), [&](const ViolationEvent& a, const ViolationEvent& b) {
      return s_.workflow.topo_position(a.task) < s_.workflow.topo_position(b.task);
    });
    return out;
  }
  Rng rng(derive_seed(master_seed, kInjectionStream, instance));
  return inject_attacks(s_, bindings_, rng, attack_rate);
}

const Simulator::Candidates& Simulator::expanded(const Violation& v) const {
  std::lock_guard lock(cache_mu_);
  auto key = std::make_tuple(v.vt, v.attack, v.severity);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  auto c = std::make_unique<Candidates>();
  auto gen = generate_chain_set(s_.workflow, sdm_, s_.catalog, v, s_.limits);
  c->chains = expand_chain_loops(s_.workflow, v.vt, gen.chains);
  c->truncated = gen.truncated;
  c->keys.reserve(c->chains.size());
  for (const auto& ch : c->chains) c->keys.push_back(ch.key(s_.workflow));
  return *cache_.emplace(key, std::move(c)).first->second;
}

std::pair<std::span<const AdaptationChain>, std::span<const std::string>> Simulator::resolved(
    const Violation& v, const AdaptationHistory& history, bool single_step, Candidates& scratch) const {
  const auto& w = s_.workflow;
  scratch.chains.clear();
  scratch.keys.clear();
  if (single_step) {
    feasible_actions(w.task(v.vt), s_.catalog, v.attack, v.severity).for_each([&](ActionType a) {
      AdaptationChain c{{ChainStep{v.vt, a, false}}};
      if (!s_.constraints.empty() &&
          any_constraint_matches(s_.constraints, effective_actions(w.size(), c, history)))
        return;
      scratch.keys.push_back(c.key(w));
      scratch.chains.push_back(std::move(c));
    });
    return {scratch.chains, scratch.keys};
  }
  const auto& all = expanded(v);
  if (s_.constraints.empty()) return {all.chains, all.keys};
  for (std::size_t k = 0; k < all.chains.size(); ++k) {
    if (any_constraint_matches(s_.constraints, effective_actions(w.size(), all.chains[k], history))) continue;
    scratch.chains.push_back(all.chains[k]);
    scratch.keys.push_back(all.keys[k]);
  }
  return {scratch.chains, scratch.keys};
}

Instance::Instance(const Simulator& sim, std::size_t id, const Weights& weights)
    : sim_(sim),
      weights_(weights),
      finish_(sim.workflow().size()),
      planned_(sim.workflow().size()),
      adapted_(sim.workflow().size(), 0) {
  trace_.instance = id;
}

void Instance::run_task(TaskIndex t, double earliest, bool rework) {
  const auto& w = sim_.workflow();
  double start = earliest;
  for (TaskIndex p : w.direct_control_predecessors(t))
    if (finish_[p]) start = std::max(start, *finish_[p]);

  const auto& s = sim_.scenario();
  const auto& bind = sim_.bindings()[t];
  TaskRecord r;
  r.task = t;
  r.start = start;
  if (planned_[t]) {
    const auto pl = *planned_[t];
    planned_[t].reset();
    const auto& spec = sim_.actions().spec(t, pl.action);
    r.action = pl.action;
    r.unintentional = pl.unintentional;
    r.price = spec.price;
    r.value = spec.value;
    r.mitigation_score = pl.ms;
    r.end = start + spec.time;
    switch (pl.action) {
      case ActionType::Skip:
        r.status = TaskStatus::Skipped;
        break;
      case ActionType::Rework:
        r.status = TaskStatus::Reworked;
        r.service = s.services[bind.backup].id;
        break;
      case ActionType::Switch:
        r.status = TaskStatus::Adapted;
        r.service = s.services[bind.backup].id;
        break;
      case ActionType::Redundancy:
        r.status = TaskStatus::Adapted;
        r.service = s.services[bind.primary].id + "+" + s.services[bind.backup].id;
        break;
      default:
        r.status = TaskStatus::Adapted;
        r.service = s.services[bind.primary].id;
    }
    if (pl.unintentional) r.status = TaskStatus::Reworked;
  } else {
    const auto base = sim_.actions().default_cost(t);
    r.price = base.price;
    r.value = base.value;
    r.end = start + base.time;
    r.service = s.services[bind.primary].id;
    r.status = rework ? TaskStatus::Reworked : TaskStatus::Completed;
  }
  finish_[t] = r.end;
  trace_.records.push_back(std::move(r));
}

void Instance::apply_chain(const AdaptationChain& chain, const Violation& v, double tau) {
  const auto& w = sim_.workflow();
  const auto n = w.size();
  if (v.vt >= n) throw ApplicationError(fmt::format("violated task index {} outside the workflow", v.vt));
  for (const auto& st : chain.steps)
    if (st.task >= n) throw ApplicationError(fmt::format("chain step on unknown task index {}", st.task));

  const ChainEvaluator eval(sim_.context(), v, trace_.history, weights_);
  auto upstream = [&](TaskIndex t) { return t == v.vt || w.control_reaches(t, v.vt); };
  std::vector<TaskIndex> starts;
  for (const auto& st : chain.steps) {
    if (!upstream(st.task)) continue;
    bool first = true;
    for (const auto& other : chain.steps)
      if (other.task != st.task && upstream(other.task) && w.control_reaches(other.task, st.task)) first = false;
    if (first) starts.push_back(st.task);
  }
  if (starts.empty()) starts.push_back(v.vt);

  std::vector<char> region(n, 0);
  for (TaskIndex sp : starts) {
    region[sp] = 1;
    for (TaskIndex t = 0; t < n; ++t)
      if (w.control_reaches(sp, t)) region[t] = 1;
  }

  HistoryEntry entry{v.vt, v.attack, v.severity, {}};
  for (TaskIndex t : w.topological_order()) {
    const ChainStep* step = chain.step_for(t);
    if (!step && !region[t]) continue;
    if (step) {
      const double ms = eval.step_ms(t, step->action);
      entry.steps.push_back({t, step->action, step->unintentional, eval.step_spec(t, step->action), ms});
      adapted_[t] = 1;
      planned_[t] = Planned{step->action, step->unintentional, ms};
      if (done(t)) run_task(t, tau, false);
    } else if (done(t) && (upstream(t) || w.control_reaches(v.vt, t))) {
      run_task(t, tau, true);
    }
  }
  trace_.history.commit(std::move(entry));
  ++trace_.chains_applied;
}

ExecutionTrace Instance::complete() {
  for (TaskIndex t : sim_.workflow().topological_order())
    if (!done(t)) run_task(t);
  trace_.totals = fold_totals(trace_.records, weights_);
  return std::move(trace_);
}

ExecutionTrace Simulator::execute(std::size_t instance, std::vector<ViolationEvent> schedule, Responder* responder,
                                  const Weights& weights) const {
  const auto& w = s_.workflow;
  const auto n = w.size();
  const auto topo = w.topological_order();
  Instance run(*this, instance, weights);
  auto& trace = run.trace();
  trace.violations = std::move(schedule);

  std::vector<std::vector<std::size_t>> due(n);
  for (std::size_t k = 0; k < trace.violations.size(); ++k) {
    const auto& ev = trace.violations[k];
    if (ev.task >= n) throw ApplicationError(fmt::format("violation on unknown task index {}", ev.task));
    due[std::min(w.topo_position(ev.task) + s_.detection_delay, n - 1)].push_back(k);
  }

  const auto ctx = context();
  Candidates scratch;
  for (std::size_t i = 0; i < n; ++i) {
    const TaskIndex t = topo[i];
    if (!run.done(t)) run.run_task(t);
    for (std::size_t k : due[i]) {
      auto& ev = trace.violations[k];
      ev.detected_at = std::max(run.finish(t), run.finish(ev.task));
      if (ev.severity < s_.tenant.adapt_threshold) {
        ev.outcome = ViolationOutcome::BelowThreshold;
        continue;
      }
      if (!responder) {
        ev.outcome = ViolationOutcome::Unhandled;
        continue;
      }
      const Violation v{ev.task, ev.attack, ev.severity};
      auto [chains, keys] = resolved(v, trace.history, responder->single_step(), scratch);
      if (chains.empty()) {
        ev.outcome = ViolationOutcome::NoResponse;
        continue;
      }
      ChainEvaluator eval(ctx, v, trace.history, weights);
      Decision d{ev, v, chains, keys, eval, trace.history, run.adapted()};
      auto pick = responder->choose(d);
      if (!pick) {
        ev.outcome = ViolationOutcome::NoResponse;
        continue;
      }
      ev.chain = keys[*pick];
      run.apply_chain(chains[*pick], v, ev.detected_at);
      ev.outcome = ViolationOutcome::Adapted;
    }
  }
  if (responder) responder->finish_instance();
  return run.complete();
}

}  // namespace wfchain
