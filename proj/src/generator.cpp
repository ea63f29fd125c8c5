#include "wfchain/generator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "wfchain/error.hpp"
#include "wfchain/rng.hpp"

namespace wfchain {

namespace {

constexpr std::uint64_t kTopologyStream = 11;
constexpr std::uint64_t kServiceStream = 12;
constexpr std::uint64_t kTaskStream = 13;

constexpr double kTimeMin = 1.0, kTimeMax = 50.0;
constexpr double kPriceMin = 0.1, kPriceMax = 10.0;

}  // namespace

Scenario generate_scenario(const GeneratorOptions& opt) {
  if (opt.tasks < 2) throw ConfigError("generator: need at least 2 tasks");
  if (opt.providers < 1 || opt.services_per_provider < 1)
    throw ConfigError("generator: providers and services per provider must be positive");
  if (opt.data_edge_share < 0 || opt.data_edge_share > 1) throw ConfigError("generator: data edge share outside [0,1]");

  const std::size_t n = opt.tasks;
  const std::size_t layers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(double(n)))), 2, n);

  // topology
  Rng topo(derive_seed(opt.seed, kTopologyStream, 0));
  std::vector<std::size_t> layer(n);
  for (std::size_t k = 0; k < n; ++k) layer[k] = k * layers / n;
  std::vector<std::vector<std::size_t>> by_layer(layers);
  for (std::size_t k = 0; k < n; ++k) by_layer[layer[k]].push_back(k);

  auto tid = [](std::size_t k) { return fmt::format("t{}", k + 1); };
  std::vector<EdgeSpec> ctrl, data;
  std::vector<DataItem> items;
  for (std::size_t k = 0; k < n; ++k) {
    if (layer[k] == 0) continue;
    const auto& prev = by_layer[layer[k] - 1];
    std::vector<std::size_t> preds{prev[topo.below(prev.size())]};
    if (topo.bernoulli(0.5)) {
      std::vector<std::size_t> earlier;
      for (std::size_t j = 0; j < n; ++j)
        if (layer[j] < layer[k] && j != preds[0]) earlier.push_back(j);
      if (!earlier.empty()) preds.push_back(earlier[topo.below(earlier.size())]);
    }
    std::sort(preds.begin(), preds.end());
    for (auto p : preds) {
      ctrl.push_back({tid(p), tid(k), ""});
      if (topo.bernoulli(opt.data_edge_share)) {
        auto id = fmt::format("d{}", items.size() + 1);
        items.push_back({id, ""});
        data.push_back({tid(p), tid(k), id});
      }
    }
  }

  // tasks
  Rng tr(derive_seed(opt.seed, kTaskStream, 0));
  std::vector<TaskSpec> tasks(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& t = tasks[k];
    t.id = tid(k);
    t.requirements.c = tr.uniform();
    t.requirements.i = tr.uniform();
    t.requirements.a = tr.uniform();
    t.value = tr.uniform(1.0, 50.0);
    for (auto a : kAllActionTypes)
      if (tr.bernoulli(0.5)) t.feasible_actions.insert(a);
    if (t.feasible_actions.empty()) t.feasible_actions.insert(kAllActionTypes[tr.below(kAllActionTypes.size())]);
  }

  Scenario s(Workflow::build(fmt::format("generated-{}", opt.seed), std::move(tasks), std::move(items), ctrl, data));

  // providers and services
  Rng sr(derive_seed(opt.seed, kServiceStream, 0));
  const auto attacks = s.catalog.attack_types();
  const std::size_t m = opt.services_per_provider;
  for (std::size_t p = 0; p < opt.providers; ++p) {
    const auto pid = fmt::format("P{}", p + 1);
    s.providers.push_back(pid);
    const double rt = sr.uniform(2.5, 3.5);
    const double rp = sr.uniform(2.5, 3.5);
    const double fast_time = sr.uniform(kTimeMin, kTimeMax / rt);
    const double cheap_price = sr.uniform(kPriceMin, kPriceMax / rp);
    for (std::size_t j = 0; j < m; ++j) {
      // j = 0 fastest and dearest, j = m-1 slowest and cheapest
      const double f = m == 1 ? 0.0 : double(j) / double(m - 1);
      CloudService svc;
      svc.id = fmt::format("{}-S{}", pid, j + 1);
      svc.provider = pid;
      svc.time = fast_time * std::pow(rt, f);
      svc.price = cheap_price * std::pow(rp, 1.0 - f);
      svc.security = {sr.uniform(), sr.uniform(), sr.uniform()};
      double sum = 0.0;
      for (const auto& a : attacks) sum += (svc.afr[a] = sr.uniform());
      if (sum > 1.0)
        for (auto& [_, r] : svc.afr) r /= sum;
      s.services.push_back(std::move(svc));
    }
  }

  s.candidates.assign(n, {});
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = sr.below(opt.providers);
    for (std::size_t j = 0; j < m; ++j) s.candidates[k].push_back(p * m + j);
  }
  return s;
}

}  // namespace wfchain
