#include <gtest/gtest.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "wfchain/error.hpp"
#include "wfchain/generator.hpp"

using namespace wfchain;

TEST(Generator, DefaultGrid) {
  auto s = generate_scenario({10, 5, 3, 1});
  EXPECT_EQ(s.workflow.size(), 10u);
  EXPECT_EQ(s.providers.size(), 5u);
  ASSERT_EQ(s.services.size(), 15u);
  for (const auto& svc : s.services) {
    EXPECT_GE(svc.time, 1.0);
    EXPECT_LE(svc.time, 50.0);
    EXPECT_GE(svc.price, 0.1);
    EXPECT_LE(svc.price, 10.0);
    EXPECT_TRUE(svc.security.within_unit());
    EXPECT_LE(svc.total_afr(), 1.0 + 1e-12);
    EXPECT_EQ(svc.afr.size(), 4u);
  }
}

TEST(Generator, Deterministic) {
  auto a = to_json(generate_scenario({12, 5, 3, 77})).dump();
  auto b = to_json(generate_scenario({12, 5, 3, 77})).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, to_json(generate_scenario({12, 5, 3, 78})).dump());
}

TEST(Generator, ServiceTriplesSpanAboutThreefold) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; checked < 1000; ++seed) {
    auto s = generate_scenario({50, 5, 3, seed});
    for (const auto& c : s.candidates) {
      ASSERT_EQ(c.size(), 3u);
      double tmin = 1e9, tmax = 0, pmin = 1e9, pmax = 0;
      for (auto k : c) {
        tmin = std::min(tmin, s.services[k].time);
        tmax = std::max(tmax, s.services[k].time);
        pmin = std::min(pmin, s.services[k].price);
        pmax = std::max(pmax, s.services[k].price);
      }
      EXPECT_GE(tmax / tmin, 2.5);
      EXPECT_LE(tmax / tmin, 3.5);
      EXPECT_GE(pmax / pmin, 2.5);
      EXPECT_LE(pmax / pmin, 3.5);
      // the fast service is the expensive one
      auto fast = *std::min_element(c.begin(), c.end(),
                                    [&](auto x, auto y) { return s.services[x].time < s.services[y].time; });
      EXPECT_EQ(s.services[fast].price, pmax);
      ++checked;
    }
  }
}

TEST(Generator, LayeredTopology) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = generate_scenario({16, 5, 3, seed});
    const auto& w = s.workflow;
    std::size_t sources = 0;
    for (TaskIndex t = 0; t < w.size(); ++t) {
      const auto preds = w.direct_control_predecessors(t).size();
      if (preds == 0) ++sources;
      EXPECT_LE(preds, 2u);
      EXPECT_FALSE(w.task(t).feasible_actions.empty());
      EXPECT_TRUE(w.task(t).requirements.within_unit());
      EXPECT_GE(w.task(t).value, 1.0);
      EXPECT_LE(w.task(t).value, 50.0);
    }
    EXPECT_GE(sources, 1u);
    EXPECT_LT(sources, w.size());
    for (const auto& d : w.data_edges()) {
      bool mirrored = false;
      for (const auto& c : w.control_edges()) mirrored = mirrored || (c.source == d.source && c.target == d.target);
      EXPECT_TRUE(mirrored);
    }
  }
}

TEST(Generator, DataEdgeShare) {
  std::size_t ctrl = 0, data = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = generate_scenario({30, 5, 3, seed});
    ctrl += s.workflow.control_edges().size();
    data += s.workflow.data_edges().size();
  }
  EXPECT_NEAR(double(data) / double(ctrl), 0.6, 0.05);
}

TEST(Generator, RoundTripsThroughJson) {
  auto s = generate_scenario({10, 5, 3, 3});
  auto doc = to_json(s);
  EXPECT_EQ(to_json(parse_scenario(doc)), doc);
}

TEST(Generator, BadCounts) {
  EXPECT_THROW(generate_scenario({1, 5, 3, 0}), ConfigError);
  EXPECT_THROW(generate_scenario({10, 0, 3, 0}), ConfigError);
  EXPECT_THROW(generate_scenario({10, 5, 0, 0}), ConfigError);
}
