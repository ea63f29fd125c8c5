#include "wfchain/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>

#include "json_util.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

using detail::json;

double CloudService::total_afr() const {
  double s = 0.0;
  for (const auto& [_, r] : afr) s += r;
  return s;
}

BindingPolicy parse_binding_policy(std::string_view text) {
  if (text == "cheapest") return {BindingPolicy::Kind::Cheapest, 0};
  if (text == "fastest") return {BindingPolicy::Kind::Fastest, 0};
  if (text == "random") return {BindingPolicy::Kind::Random, 0};
  if (text.starts_with("random:")) {
    auto num = text.substr(7);
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), seed);
    if (ec == std::errc() && p == num.data() + num.size()) return {BindingPolicy::Kind::Random, seed};
  }
  throw ConfigError(fmt::format("unknown binding policy '{}'", text));
}

std::string to_string(const BindingPolicy& p) {
  switch (p.kind) {
    case BindingPolicy::Kind::Cheapest: return "cheapest";
    case BindingPolicy::Kind::Fastest: return "fastest";
    case BindingPolicy::Kind::Random: return fmt::format("random:{}", p.seed);
  }
  return "cheapest";
}

const AdaptationParameters& Scenario::params_for(TaskIndex t) const {
  auto it = task_params.find(t);
  return it == task_params.end() ? params : it->second;
}

std::size_t Scenario::service_index(std::string_view id) const {
  for (std::size_t k = 0; k < services.size(); ++k)
    if (services[k].id == id) return k;
  throw LookupError(fmt::format("unknown service '{}'", id));
}

namespace {

AdaptationParameters parse_params(const json& doc, const std::string& path, AdaptationParameters p) {
  using detail::number_field_or;
  if (!doc.is_object()) throw ParseError(fmt::format("{}: expected an object", path));
  static const std::map<std::string, double AdaptationParameters::*> fields{
      {"new_task_time", &AdaptationParameters::new_task_time},
      {"new_task_price", &AdaptationParameters::new_task_price},
      {"new_task_value", &AdaptationParameters::new_task_value},
      {"switch_time", &AdaptationParameters::switch_time},
      {"switch_value", &AdaptationParameters::switch_value},
      {"reconfig_time", &AdaptationParameters::reconfig_time},
      {"reconfig_price", &AdaptationParameters::reconfig_price},
      {"redundancy_value", &AdaptationParameters::redundancy_value},
      {"reconfig_value", &AdaptationParameters::reconfig_value},
  };
  for (const auto& [key, v] : doc.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(fmt::format("{}.{}: unknown adaptation parameter", path, key));
    double x = detail::as_number(v, detail::child(path, key));
    if (x < 0) throw ValidationError(fmt::format("{}.{}: must be nonnegative", path, key));
    p.*(it->second) = x;
  }
  return p;
}

json params_json(const AdaptationParameters& p) {
  return {{"new_task_time", p.new_task_time},     {"new_task_price", p.new_task_price},
          {"new_task_value", p.new_task_value},   {"switch_time", p.switch_time},
          {"switch_value", p.switch_value},       {"reconfig_time", p.reconfig_time},
          {"reconfig_price", p.reconfig_price},   {"redundancy_value", p.redundancy_value},
          {"reconfig_value", p.reconfig_value}};
}

Weights parse_weights_json(const json& v, const std::string& path) {
  if (v.is_string()) return parse_weights(v.get<std::string>());
  if (!v.is_array() || v.size() != 4) throw ParseError(fmt::format("{}: expected four weights", path));
  Weights w{detail::as_number(v[0], detail::child(path, 0)), detail::as_number(v[1], detail::child(path, 1)),
            detail::as_number(v[2], detail::child(path, 2)), detail::as_number(v[3], detail::child(path, 3))};
  if (!w.valid()) throw ValidationError(fmt::format("{}: weights must be nonnegative magnitudes", path));
  return w;
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / path).string();
}

Severity severity_field(const json& v, const std::string& path) {
  auto name = detail::as_string(v, path);
  auto s = parse_severity(name);
  if (!s) throw ParseError(fmt::format("{}: unknown severity '{}'", path, name));
  return *s;
}

double band_midpoint(Severity s) {
  switch (s) {
    case Severity::Low: return 1.0 / 6.0;
    case Severity::Medium: return 0.5;
    case Severity::High: return 5.0 / 6.0;
  }
  return 0.5;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::string& base_dir) {
  using namespace detail;
  if (!doc.is_object()) throw ParseError("scenario: expected an object");

  const auto& jw = require(doc, "workflow", "");
  Scenario s(jw.is_string() ? load_workflow(resolve_path(base_dir, jw.get<std::string>())) : parse_workflow(jw));
  const auto& w = s.workflow;

  if (auto it = doc.find("catalog"); it != doc.end()) {
    s.catalog = it->is_string() ? ThreatCatalog::load(resolve_path(base_dir, it->get<std::string>()))
                                : ThreatCatalog::from_json(*it);
  }

  if (auto it = doc.find("providers"); it != doc.end()) {
    as_array(*it, "providers");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& jp = (*it)[k];
      s.providers.push_back(jp.is_string() ? jp.get<std::string>() : string_field(jp, "id", child("providers", k)));
    }
  }

  const auto& jservices = as_array(require(doc, "services", ""), "services");
  for (std::size_t k = 0; k < jservices.size(); ++k) {
    const auto path = child("services", k);
    const auto& js = jservices[k];
    CloudService svc;
    svc.id = string_field(js, "id", path);
    svc.provider = js.contains("provider") ? string_field(js, "provider", path) : "";
    svc.price = number_field(js, "price", path);
    svc.time = number_field(js, "time", path);
    svc.security = {number_field_or(js, "c", 0.0, path), number_field_or(js, "i", 0.0, path),
                    number_field_or(js, "a", 0.0, path)};
    if (svc.price < 0 || svc.time < 0) throw ValidationError(fmt::format("{}: price and time must be nonnegative", path));
    if (!svc.security.within_unit()) throw ValidationError(fmt::format("{}: C, I, A must lie in [0,1]", path));
    if (!svc.provider.empty() && !s.providers.empty() &&
        std::find(s.providers.begin(), s.providers.end(), svc.provider) == s.providers.end())
      throw ValidationError(fmt::format("{}.provider: unknown provider '{}'", path, svc.provider));
    if (auto a = js.find("afr"); a != js.end()) {
      if (!a->is_object()) throw ParseError(fmt::format("{}.afr: expected an object", path));
      for (const auto& [type, rate] : a->items()) {
        const auto rpath = child(child(path, "afr"), type);
        double r = as_number(rate, rpath);
        if (r < 0 || r > 1) throw ValidationError(fmt::format("{}: rate must lie in [0,1]", rpath));
        if (!s.catalog.has_attack(type)) throw ValidationError(fmt::format("{}: attack type not in catalog", rpath));
        svc.afr[type] = r;
      }
    }
    for (const auto& other : s.services)
      if (other.id == svc.id) throw ValidationError(fmt::format("duplicate service id '{}'", svc.id));
    s.services.push_back(std::move(svc));
  }

  s.candidates.assign(w.size(), {});
  if (auto it = doc.find("candidates"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("candidates: expected an object of task -> [service ids]");
    for (const auto& [tid, list] : it->items()) {
      const auto path = child("candidates", tid);
      if (!w.contains(tid)) throw ValidationError(fmt::format("{}: unknown task", path));
      as_array(list, path);
      for (std::size_t k = 0; k < list.size(); ++k) {
        auto sid = as_string(list[k], child(path, k));
        try {
          s.candidates[w.index_of(tid)].push_back(s.service_index(sid));
        } catch (const LookupError&) {
          throw ValidationError(fmt::format("{}: unknown service '{}'", child(path, k), sid));
        }
      }
    }
  }

  if (auto it = doc.find("tenants"); it != doc.end()) {
    as_array(*it, "tenants");
    if (it->empty()) throw ValidationError("tenants: at least one tenant is required");
    const auto& jt = (*it)[0];
    s.tenant.id = jt.contains("id") ? string_field(jt, "id", "tenants[0]") : "tenant";
    if (jt.contains("weights")) s.tenant.weights = parse_weights_json(jt["weights"], "tenants[0].weights");
    if (jt.contains("adapt_threshold"))
      s.tenant.adapt_threshold = severity_field(jt["adapt_threshold"], "tenants[0].adapt_threshold");
  }

  if (auto it = doc.find("constraints"); it != doc.end()) {
    as_array(*it, "constraints");
    for (std::size_t k = 0; k < it->size(); ++k)
      s.constraints.push_back(parse_constraint(w, s.catalog, (*it)[k], child("constraints", k)));
  }

  if (auto it = doc.find("adaptation"); it != doc.end()) s.params = parse_params(*it, "adaptation", {});
  if (auto it = doc.find("task_adaptation"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("task_adaptation: expected an object");
    for (const auto& [tid, jp] : it->items()) {
      if (!w.contains(tid)) throw ValidationError(fmt::format("task_adaptation.{}: unknown task", tid));
      s.task_params[w.index_of(tid)] = parse_params(jp, child("task_adaptation", tid), s.params);
    }
  }

  if (auto it = doc.find("binding_policy"); it != doc.end())
    s.binding_policy = parse_binding_policy(as_string(*it, "binding_policy"));

  if (auto it = doc.find("violations"); it != doc.end()) {
    as_array(*it, "violations");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto path = child("violations", k);
      const auto& jv = (*it)[k];
      ScriptedViolation v;
      auto tid = string_field(jv, "task", path);
      if (!w.contains(tid)) throw ValidationError(fmt::format("{}.task: unknown task '{}'", path, tid));
      v.task = w.index_of(tid);
      v.attack = string_field(jv, "attack", path);
      if (!s.catalog.has_attack(v.attack))
        throw ValidationError(fmt::format("{}.attack: unknown attack type '{}'", path, v.attack));
      if (jv.contains("score")) {
        v.score = number_field(jv, "score", path);
        if (v.score < 0 || v.score > 1) throw ValidationError(fmt::format("{}.score: must lie in [0,1]", path));
        v.severity = severity_from_score(v.score);
      }
      if (jv.contains("severity")) {
        v.severity = severity_field(jv["severity"], child(path, "severity"));
        if (!jv.contains("score")) v.score = band_midpoint(v.severity);
      }
      s.scripted.push_back(std::move(v));
    }
  }

  if (auto it = doc.find("detection_delay"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw ParseError("detection_delay: expected a nonnegative integer");
    s.detection_delay = it->get<std::size_t>();
  }
  if (auto it = doc.find("limits"); it != doc.end()) {
    if (it->contains("max_chain_length")) s.limits.max_chain_length = (*it)["max_chain_length"].get<std::size_t>();
    if (it->contains("max_chains")) s.limits.max_chains = (*it)["max_chains"].get<std::size_t>();
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  auto doc = detail::read_json_file(path);
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_scenario(doc, dir.empty() ? "." : dir);
}

json to_json(const Scenario& s) {
  const auto& w = s.workflow;
  json doc;
  doc["workflow"] = to_json(w);
  if (!(s.catalog == ThreatCatalog::builtin())) doc["catalog"] = s.catalog.to_json();
  doc["providers"] = s.providers;
  doc["services"] = json::array();
  for (const auto& svc : s.services) {
    json afr = json::object();
    for (const auto& [k, v] : svc.afr) afr[k] = v;
    doc["services"].push_back({{"id", svc.id},
                               {"provider", svc.provider},
                               {"price", svc.price},
                               {"time", svc.time},
                               {"c", svc.security.c},
                               {"i", svc.security.i},
                               {"a", svc.security.a},
                               {"afr", afr}});
  }
  doc["candidates"] = json::object();
  for (TaskIndex t = 0; t < w.size(); ++t) {
    json list = json::array();
    for (auto k : s.candidates[t]) list.push_back(s.services[k].id);
    doc["candidates"][w.id_of(t)] = list;
  }
  const auto& wt = s.tenant.weights;
  doc["tenants"] = json::array({{{"id", s.tenant.id},
                                 {"weights", {wt.price, wt.time, wt.value, wt.mitigation}},
                                 {"adapt_threshold", std::string(to_string(s.tenant.adapt_threshold))}}});
  doc["constraints"] = json::array();
  for (const auto& c : s.constraints) doc["constraints"].push_back(to_json(w, c));
  doc["adaptation"] = params_json(s.params);
  if (!s.task_params.empty()) {
    doc["task_adaptation"] = json::object();
    for (const auto& [t, p] : s.task_params) doc["task_adaptation"][w.id_of(t)] = params_json(p);
  }
  doc["binding_policy"] = to_string(s.binding_policy);
  if (!s.scripted.empty()) {
    doc["violations"] = json::array();
    for (const auto& v : s.scripted)
      doc["violations"].push_back({{"task", w.id_of(v.task)},
                                   {"attack", v.attack},
                                   {"severity", std::string(to_string(v.severity))},
                                   {"score", v.score}});
  }
  doc["detection_delay"] = s.detection_delay;
  doc["limits"] = {{"max_chain_length", s.limits.max_chain_length}, {"max_chains", s.limits.max_chains}};
  return doc;
}

}  // namespace wfchain
