#pragma once

#include <cstdint>

#include "wfchain/scenario.hpp"

namespace wfchain {

struct GeneratorOptions {
  std::size_t tasks = 10;
  std::size_t providers = 5;
  std::size_t services_per_provider = 3;
  std::uint64_t seed = 0;
  double data_edge_share = 0.6;
};

// Seeded layered DAG (about sqrt(n) layers) bound to a provider x service grid.
// Each provider's services run from fast/expensive to slow/cheap with roughly
// threefold spreads in time and price. ConfigError on bad counts.
Scenario generate_scenario(const GeneratorOptions& opt);

}  // namespace wfchain
