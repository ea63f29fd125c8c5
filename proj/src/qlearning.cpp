#include "wfchain/qlearning.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

using detail::json;

Abstraction parse_abstraction(std::string_view name) {
  if (name == "compact") return Abstraction::Compact;
  if (name == "full") return Abstraction::Full;
  throw ConfigError(fmt::format("unknown state abstraction '{}'", name));
}

std::string_view to_string(Abstraction a) { return a == Abstraction::Full ? "full" : "compact"; }

std::string RLState::key(const Workflow& w) const {
  auto k = fmt::format("{}|{}|{}", w.id_of(vt), attack, to_string(severity));
  if (!mask.empty()) {
    k += '|';
    for (char b : mask) k += b ? '1' : '0';
  }
  return k;
}

RLState encode_state(const Violation& v, std::span<const char> adapted, Abstraction abstraction) {
  RLState s{v.vt, v.attack, v.severity, {}};
  if (abstraction == Abstraction::Full) {
    s.mask.assign(adapted.begin(), adapted.end());
    for (auto& b : s.mask) b = b ? 1 : 0;
  }
  return s;
}

const QEntry* QTable::find(const std::string& state, const std::string& chain) const {
  auto it = entries_.find(state);
  if (it == entries_.end()) return nullptr;
  auto jt = it->second.find(chain);
  return jt == it->second.end() ? nullptr : &jt->second;
}

double QTable::default_value() const {
  if (!max_seen_) return default_q_;
  return *max_seen_ + 0.1 * std::abs(*max_seen_);
}

double QTable::value(const std::string& state, const std::string& chain) const {
  const auto* e = find(state, chain);
  return e ? e->q : default_value();
}

void QTable::observe_cost(double cost) {
  if (!std::isfinite(cost)) return;
  if (!max_seen_ || cost > *max_seen_) max_seen_ = cost;
}

void QTable::freeze() {
  std::optional<double> mx;
  for (const auto& [_, row] : entries_)
    for (const auto& [__, e] : row)
      if (!mx || e.q > *mx) mx = e.q;
  if (mx) max_seen_ = mx;
}

void QTable::set(const RLState& st, const std::string& state_key, const std::string& chain, QEntry e) {
  states_.try_emplace(state_key, st);
  entries_[state_key][chain] = e;
}

std::size_t QTable::size() const {
  std::size_t n = 0;
  for (const auto& [_, row] : entries_) n += row.size();
  return n;
}

bool operator==(const QTable& a, const QTable& b) {
  return a.entries_ == b.entries_ && a.states_ == b.states_ && a.default_value() == b.default_value();
}

json QTable::to_json(const Workflow& w) const {
  json out = json::array();
  for (const auto& [sk, row] : entries_) {
    const auto& st = states_.at(sk);
    json js = {{"task", w.id_of(st.vt)}, {"attack", st.attack}, {"severity", std::string(to_string(st.severity))}};
    if (!st.mask.empty()) {
      json m = json::array();
      for (TaskIndex t = 0; t < st.mask.size(); ++t)
        if (st.mask[t]) m.push_back(w.id_of(t));
      js["mask"] = m;
    }
    for (const auto& [chain, e] : row) out.push_back({{"state", js}, {"chain", chain}, {"q", e.q}, {"visits", e.visits}});
  }
  return out;
}

QTable QTable::from_json(const json& doc, const Workflow& w) {
  using namespace detail;
  as_array(doc, "qtable");
  bool full = false;
  for (const auto& e : doc)
    if (e.is_object() && e.contains("state") && e["state"].contains("mask")) full = true;
  QTable q(0.0, full ? Abstraction::Full : Abstraction::Compact);
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto path = child("qtable", k);
    const auto& e = doc[k];
    const auto& js = require(e, "state", path);
    const auto spath = child(path, "state");
    RLState st;
    auto tid = string_field(js, "task", spath);
    if (!w.contains(tid)) throw ValidationError(fmt::format("{}.task: unknown task '{}'", spath, tid));
    st.vt = w.index_of(tid);
    st.attack = string_field(js, "attack", spath);
    auto sev = parse_severity(string_field(js, "severity", spath));
    if (!sev) throw ParseError(fmt::format("{}.severity: unknown severity", spath));
    st.severity = *sev;
    if (full) {
      st.mask.assign(w.size(), 0);
      if (js.contains("mask")) {
        as_array(js["mask"], child(spath, "mask"));
        for (const auto& m : js["mask"]) {
          auto id = as_string(m, child(spath, "mask"));
          if (!w.contains(id)) throw ValidationError(fmt::format("{}.mask: unknown task '{}'", spath, id));
          st.mask[w.index_of(id)] = 1;
        }
      }
    }
    const auto& jv = require(e, "visits", path);
    if (!jv.is_number_unsigned()) throw ParseError(fmt::format("{}.visits: expected a nonnegative integer", path));
    QEntry qe{number_field(e, "q", path), jv.get<std::size_t>()};
    q.set(st, st.key(w), string_field(e, "chain", path), qe);
  }
  q.freeze();
  return q;
}

QTable QTable::load(const std::string& path, const Workflow& w) { return from_json(detail::read_json_file(path), w); }

void QTable::save(const std::string& path, const Workflow& w) const {
  detail::write_text_file(path, to_json(w).dump(1) + "\n");
}

void RLConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError(fmt::format("rl.alpha must lie in (0,1], got {}", alpha));
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError(fmt::format("rl.gamma must lie in [0,1), got {}", gamma));
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ConfigError("rl.epsilon values must lie in [0,1]");
  if (epsilon_decay && !(*epsilon_decay > 0.0 && *epsilon_decay <= 1.0))
    throw ConfigError("rl.epsilon_decay must lie in (0,1]");
  if (!(attack_rate >= 0.0 && attack_rate <= 1.0)) throw ConfigError("rl.attack_rate must lie in [0,1]");
  if (!std::isfinite(default_q)) throw ConfigError("rl.default_q must be finite");
}

double RLConfig::epsilon(std::size_t episode) const {
  if (epsilon_decay) return std::max(epsilon_end, epsilon_start * std::pow(*epsilon_decay, double(episode)));
  if (episodes <= 1) return epsilon_start;
  const double f = double(episode) / double(episodes - 1);
  if (epsilon_start <= 0.0 || epsilon_end <= 0.0) return epsilon_start + (epsilon_end - epsilon_start) * f;
  return epsilon_start * std::pow(epsilon_end / epsilon_start, f);
}

RLConfig parse_rl_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("rl config: expected an object");
  RLConfig c;
  for (const auto& [key, v] : doc.items()) {
    const auto path = child("rl", key);
    try {
      if (key == "alpha") c.alpha = as_number(v, path);
      else if (key == "gamma") c.gamma = as_number(v, path);
      else if (key == "epsilon_start") c.epsilon_start = as_number(v, path);
      else if (key == "epsilon_end") c.epsilon_end = as_number(v, path);
      else if (key == "epsilon_decay") c.epsilon_decay = as_number(v, path);
      else if (key == "default_q") c.default_q = as_number(v, path);
      else if (key == "attack_rate") c.attack_rate = as_number(v, path);
      else if (key == "abstraction") c.abstraction = parse_abstraction(as_string(v, path));
      else if (key == "episodes") {
        if (!v.is_number_unsigned()) throw ConfigError(fmt::format("{}: expected a nonnegative integer", path));
        c.episodes = v.get<std::size_t>();
      } else
        throw ConfigError(fmt::format("{}: unknown field", path));
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }
  c.validate();
  return c;
}

RLConfig load_rl_config(const std::string& path) {
  json doc;
  try {
    doc = detail::read_json_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return parse_rl_config(doc);
}

json to_json(const RLConfig& c) {
  json j = {{"alpha", c.alpha},
            {"gamma", c.gamma},
            {"epsilon_start", c.epsilon_start},
            {"epsilon_end", c.epsilon_end},
            {"episodes", c.episodes},
            {"default_q", c.default_q},
            {"abstraction", std::string(to_string(c.abstraction))},
            {"attack_rate", c.attack_rate}};
  if (c.epsilon_decay) j["epsilon_decay"] = *c.epsilon_decay;
  return j;
}

std::size_t select_action(const QTable& q, const std::string& state, std::span<const std::string> keys,
                          double epsilon, Rng& rng) {
  if (keys.empty()) throw SelectionError("no candidate chain to select from");
  if (rng.uniform() < epsilon) return rng.below(keys.size());
  std::size_t best = 0;
  double best_q = q.value(state, keys[0]);
  for (std::size_t k = 1; k < keys.size(); ++k) {
    const double v = q.value(state, keys[k]);
    if (v < best_q) {
      best = k;
      best_q = v;
    }
  }
  return best;
}

double q_update(QTable& q, const RLState& st, const std::string& state_key, const std::string& chain, double cost,
                const std::optional<NextState>& next, const RLConfig& cfg) {
  const auto* cur = q.find(state_key, chain);
  const double old = cur ? cur->q : q.default_value();
  const std::size_t visits = cur ? cur->visits : 0;
  double min_next = 0.0;
  if (next && !next->keys.empty()) {
    min_next = std::numeric_limits<double>::infinity();
    for (const auto& k : next->keys) min_next = std::min(min_next, q.value(next->state, k));
  }
  const double updated = old + cfg.alpha * (cost + cfg.gamma * min_next - old);
  q.set(st, state_key, chain, {updated, visits + 1});
  return updated;
}

std::optional<std::size_t> QResponder::choose(const Decision& d) {
  if (d.keys.empty()) return std::nullopt;
  const auto key = encode_state(d.violation, d.adapted, q_.abstraction()).key(w_);
  return select_action(q_, key, d.keys, 0.0, rng_);
}

namespace {

// Epsilon-greedy learner. The update for a decision waits for the next
// decision in the same instance (its state and candidates) or the instance end.
class TrainingResponder : public Responder {
 public:
  TrainingResponder(QTable& q, const Workflow& w, const RLConfig& cfg, Rng& rng)
      : q_(q), w_(w), cfg_(cfg), rng_(rng) {}

  void set_epsilon(double e) { epsilon_ = e; }
  double cost_sum() const { return cost_sum_; }
  std::size_t decisions() const { return decisions_; }
  void reset_episode() {
    cost_sum_ = 0.0;
    decisions_ = 0;
  }

  std::optional<std::size_t> choose(const Decision& d) override {
    if (d.keys.empty()) return std::nullopt;
    auto st = encode_state(d.violation, d.adapted, cfg_.abstraction);
    auto key = st.key(w_);
    flush(NextState{key, d.keys});
    const auto pick = select_action(q_, key, d.keys, epsilon_, rng_);
    const double cost = d.evaluator.cost(d.candidates[pick]).total;
    pending_ = Pending{std::move(st), std::move(key), d.keys[pick], cost};
    cost_sum_ += cost;
    ++decisions_;
    return pick;
  }

  void finish_instance() override { flush(std::nullopt); }

 private:
  struct Pending {
    RLState state;
    std::string key;
    std::string chain;
    double cost;
  };

  void flush(const std::optional<NextState>& next) {
    if (!pending_) return;
    q_update(q_, pending_->state, pending_->key, pending_->chain, pending_->cost, next, cfg_);
    q_.observe_cost(pending_->cost);
    pending_.reset();
  }

  QTable& q_;
  const Workflow& w_;
  const RLConfig& cfg_;
  Rng& rng_;
  double epsilon_ = 1.0;
  std::optional<Pending> pending_;
  double cost_sum_ = 0.0;
  std::size_t decisions_ = 0;
};

constexpr std::uint64_t kTrainingInstances = 4;

}  // namespace

TrainResult train(const Scenario& s, const RLConfig& cfg, std::uint64_t seed, const Weights& weights) {
  cfg.validate();
  if (!weights.valid()) throw ConfigError("weights must be nonnegative");
  Simulator sim(s);
  TrainResult out{QTable(cfg.default_q, cfg.abstraction), {}};
  Rng rng(derive_seed(seed, kAgentStream, 0));
  TrainingResponder agent(out.table, s.workflow, cfg, rng);
  const auto master = derive_seed(seed, kTrainingInstances, 0);
  out.log.reserve(cfg.episodes);
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    const double eps = cfg.epsilon(e);
    agent.set_epsilon(eps);
    agent.reset_episode();
    sim.execute(e, sim.schedule(master, e, cfg.attack_rate), &agent, weights);
    const auto n = agent.decisions();
    out.log.push_back({e, eps, n ? agent.cost_sum() / double(n) : 0.0, n});
  }
  out.table.freeze();
  return out;
}

void write_train_log(const std::string& path, std::span<const TrainLogRow> log) {
  std::string text = "episode,epsilon,mean_cost\n";
  for (const auto& r : log) text += fmt::format("{},{:.17g},{:.17g}\n", r.episode, r.epsilon, r.mean_cost);
  detail::write_text_file(path, text);
}

}  // namespace wfchain
