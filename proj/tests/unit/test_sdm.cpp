#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "wfchain/error.hpp"
#include "wfchain/sdm.hpp"

using namespace wfchain;
using wfchain::testing::fixture;
using wfchain::testing::nodes_on_paths;

namespace {

Workflow insurance() { return load_workflow(fixture("insurance_workflow.json")); }

// Path-enumeration reference for one matrix cell.
Cia oracle_cell(const wfchain::testing::RandomDag& g, const Workflow& w, int i, int j) {
  if (i == j) return {1, 1, 1};
  auto req = [&](int k) { return w.task(w.index_of("t" + std::to_string(k))).requirements; };
  auto fwd_data = nodes_on_paths(g.data, i, j);
  auto bwd_data = nodes_on_paths(g.data, j, i);
  auto fwd_ctrl = nodes_on_paths(g.ctrl, i, j);
  Cia out;
  auto prod = [&](const std::set<int>& nodes, double Cia::*f) {
    double p = 1.0;
    for (int k : nodes) p *= req(k).*f;
    return p;
  };
  if (!fwd_data.empty()) out.c = prod(fwd_data, &Cia::c);
  else if (!bwd_data.empty()) out.c = prod(bwd_data, &Cia::c);
  if (!fwd_data.empty() || !fwd_ctrl.empty()) {
    std::set<int> both = fwd_data;
    both.insert(fwd_ctrl.begin(), fwd_ctrl.end());
    out.i = prod(both, &Cia::i);
  }
  if (!fwd_data.empty()) out.a = prod(fwd_data, &Cia::a);
  return out;
}

}  // namespace

TEST(Sdm, DiagonalIsOne) {
  auto w = insurance();
  auto m = compute_sdm(w);
  for (TaskIndex t = 0; t < w.size(); ++t) EXPECT_EQ(m.at(t, t), (Cia{1, 1, 1}));
}

TEST(Sdm, UnrelatedTasksAreZero) {
  auto w = insurance();
  auto m = compute_sdm(w);
  EXPECT_TRUE(m.at("t8", "t5").is_zero());
  EXPECT_TRUE(m.at("t2", "t5").is_zero());
}

TEST(Sdm, InsuranceCells) {
  auto w = insurance();
  auto m = compute_sdm(w);
  // t3 -> t5 -> t6 by data: product over t3, t5, t6.
  EXPECT_DOUBLE_EQ(m.at("t3", "t6").c, 0.5 * 0.5 * 1.0);
  EXPECT_DOUBLE_EQ(m.at("t3", "t6").a, 1.0);
  // backward data path only gives confidentiality.
  EXPECT_EQ(m.at("t5", "t3"), (Cia{0.25, 0, 0}));
  // control-only reach gives integrity only.
  EXPECT_EQ(m.at("t1", "t5"), (Cia{0, 1, 0}));
  EXPECT_EQ(m.at("t5", "t8"), (Cia{0, 0.1, 0}));
  EXPECT_EQ(m.at("t5", "t7"), (Cia{0, 0, 0}));
}

TEST(Sdm, DependentTasksOfT5) {
  auto w = insurance();
  auto m = compute_sdm(w);
  EXPECT_EQ(dependent_tasks(m, "t5"), (std::set<std::string>{"t3", "t4", "t5", "t6", "t8"}));
}

TEST(Sdm, DependentTasksAlwaysContainVt) {
  auto w = insurance();
  auto m = compute_sdm(w);
  for (TaskIndex t = 0; t < w.size(); ++t) EXPECT_TRUE(dependent_tasks(m, t).contains(t));
}

TEST(Sdm, UnknownTask) {
  auto m = compute_sdm(insurance());
  EXPECT_THROW(dependent_tasks(m, "nope"), LookupError);
}

TEST(Sdm, CsvLayout) {
  auto w = insurance();
  auto csv = compute_sdm(w).to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), ",t1,t2,t3,t4,t5,t6,t7,t8");
  EXPECT_NE(csv.find("\nt1,1|1|1,"), std::string::npos);
}

TEST(Sdm, MatchesPathEnumerationOracle) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 60; ++round) {
    const int n = 2 + static_cast<int>(rng() % 9);
    auto g = wfchain::testing::random_dag(rng, n, 0.35, 0.6);
    auto w = parse_workflow(g.doc);
    auto m = compute_sdm(w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto ref = oracle_cell(g, w, i, j);
        auto got = m.at("t" + std::to_string(i), "t" + std::to_string(j));
        ASSERT_NEAR(got.c, ref.c, 1e-12);
        ASSERT_NEAR(got.i, ref.i, 1e-12);
        ASSERT_NEAR(got.a, ref.a, 1e-12);
        ASSERT_TRUE(got.within_unit());
      }
  }
}
