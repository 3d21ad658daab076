#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "onedelta/adversary.hpp"

using namespace onedelta;

TEST_CASE("three-group split constructions partition the replicas") {
  const std::uint32_t n = 6;
  auto scenarios = scenario_lowerbound_sync(n);
  REQUIRE(scenarios.size() == 3);
  for (const auto& lb : scenarios) {
    CHECK(lb.inputs.size() == n);
    // Exactly one third is corrupt in each scenario.
    CHECK(lb.silent.size() + lb.equivocators.size() == n / 3);
    for (ReplicaId r : lb.silent) CHECK(r < n);
    for (ReplicaId r : lb.equivocators) CHECK(r < n);
  }
  // The corrupt group differs across the three scenarios.
  CHECK(scenarios[0].silent != scenarios[1].silent);
  // Only the split-brain scenario pins delays at the pessimistic bound.
  CHECK(scenarios[2].delta_equals_Delta);
  CHECK(scenarios[2].equivocators.size() == n / 3);
  CHECK_FALSE(scenarios[2].equiv_to_x.empty());
  CHECK_FALSE(scenarios[2].equiv_to_y.empty());
}

TEST_CASE("link-failure split constructions stay inside the link budget") {
  const std::uint32_t f = 2;
  auto scenarios = scenario_lowerbound_mlf(f, 1000);
  REQUIRE(scenarios.size() == 3);
  SimConfig cfg;
  cfg.n = 3 * f - 1;
  cfg.f = f;
  cfg.delta = 10;
  cfg.Delta = 10;
  for (const auto& lb : scenarios) {
    REQUIRE(lb.links.has_value());
    CHECK_FALSE(check_link_budget(*lb.links, cfg).has_value());
    CHECK(lb.silent.size() + lb.equivocators.size() <= 1);
  }
  CHECK(scenarios[2].equivocators.size() == 1);
}

TEST_CASE("fuzz plans always respect the fault budgets") {
  SimConfig cfg;
  cfg.n = 5;
  cfg.f = 2;
  cfg.Delta = 8;
  cfg.delta = 4;
  cfg.sigma = 8;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto plan = make_fuzz_plan(seed, cfg, /*allow_byzantine=*/true, /*with_links=*/false,
                               /*with_sluggish=*/false);
    std::uint32_t byz = 0;
    for (bool b : plan.byzantine) byz += b ? 1 : 0;
    CHECK(byz <= cfg.f);
    REQUIRE(plan.start_offsets.size() == cfg.n);
    for (Tick o : plan.start_offsets) {
      CHECK(o >= 0);
      CHECK(o <= cfg.sigma);
    }
    for (const auto& [r, strat] : plan.strategy) {
      CHECK(plan.byzantine[r]);
      CHECK(strat >= 0);
      CHECK(strat <= 2);
    }
  }
}

TEST_CASE("fuzzed link schedules pass the budget checker") {
  SimConfig cfg;
  cfg.n = 5;
  cfg.f = 2;
  cfg.Delta = 8;
  cfg.delta = 4;
  cfg.mode = DeliveryMode::MobileLink;
  int with_faults = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto plan = make_fuzz_plan(seed, cfg, false, /*with_links=*/true, false);
    REQUIRE(plan.links.has_value());
    CHECK_FALSE(check_link_budget(*plan.links, cfg).has_value());
    if (!plan.links->faults.empty()) ++with_faults;
  }
  CHECK(with_faults > 20);  // the generator actually produces faults
}

TEST_CASE("fuzzed sluggish schedules pass the budget checker") {
  SimConfig cfg;
  cfg.n = 4;
  cfg.f = 1;
  cfg.Delta = 8;
  cfg.delta = 4;
  cfg.mode = DeliveryMode::MobileSluggish;
  int with_windows = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto plan = make_fuzz_plan(seed, cfg, true, false, /*with_sluggish=*/true);
    REQUIRE(plan.sluggish.has_value());
    CHECK_FALSE(check_sluggish_budget(*plan.sluggish, cfg, plan.byzantine).has_value());
    if (!plan.sluggish->windows.empty()) ++with_windows;
  }
  CHECK(with_windows > 50);
}

TEST_CASE("fuzz plans are a pure function of the seed") {
  SimConfig cfg;
  cfg.n = 5;
  cfg.f = 2;
  cfg.sigma = 5;
  auto a = make_fuzz_plan(42, cfg, true, true, true);
  auto b = make_fuzz_plan(42, cfg, true, true, true);
  CHECK(a.byzantine == b.byzantine);
  CHECK(a.start_offsets == b.start_offsets);
  CHECK(a.inputs == b.inputs);
  CHECK(a.strategy == b.strategy);
}
