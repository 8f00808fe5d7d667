#include <catch2/catch_amalgamated.hpp>

#include "ems/simulator.hpp"
#include "support.hpp"

using namespace ems;
using Catch::Approx;

namespace {

Scenario battery_only(std::size_t slots) {
  Scenario s;
  s.n = 0;
  s.slots = slots;
  s.rp.assign(slots, {});
  s.d.assign(slots, {});
  s.t_out.assign(slots, {});
  s.t_opt.assign(slots, {});
  s.m_s.assign(slots, 10.0);
  s.m_b.assign(slots, 3.0);
  s.g_t.assign(slots, 0.0);
  return s;
}

}  // namespace

TEST_CASE("idle battery-only slot earns nothing") {
  const Scenario s = battery_only(1);
  const SystemSetup setup = make_default_setup(s, {}, PmeParams{});
  const SlotPolicy idle = [](const SlotState&, std::size_t) {
    return SlotDecision{{10.0, 3.0, 0.0}, {}, true, 0, {}};
  };
  const RunReport r = run_policy(s, setup, idle);
  REQUIRE(r.slots.size() == 1);
  CHECK(r.pme_profit == 0.0);
  CHECK(r.slots[0].next.e_batt == r.initial.e_batt);
  CHECK(r.slots[0].next.b == r.initial.b);
}

TEST_CASE("default run keeps temperatures and battery in their bands") {
  SyntheticSpec spec = test::desk_spec(5);
  spec.slots = 24;
  const Experiment ex = make_experiment(spec, NanogridParams{}, PmeParams{});
  const RunReport r = run(ex.scenario, ex.setup, GameConfig{});
  CHECK(r.comfort_violations == 0);
  CHECK(r.battery_violations == 0);
  for (const auto& o : r.slots) {
    for (double t : o.next.t) {
      REQUIRE(t >= 66.0 - 1e-9);
      REQUIRE(t <= 77.0 + 1e-9);
    }
    REQUIRE(o.next.e_batt >= 2.0 - 1e-9);
    REQUIRE(o.next.e_batt <= 16.0 + 1e-9);
  }
}

TEST_CASE("report totals equal re-accumulation of the slot series") {
  const Experiment ex = test::desk_experiment(2);
  const RunReport r = run(ex.scenario, ex.setup, GameConfig{});
  double profit = 0, energy = 0, discomfort = 0, hvac = 0, dev = 0;
  for (std::size_t k = 0; k < r.slots.size(); ++k) {
    const SlotOutcome& o = r.slots[k];
    REQUIRE(o.slot == k);
    profit += o.pme_profit;
    for (std::size_t i = 0; i < ex.scenario.n; ++i) {
      energy += o.trade_cost[i];
      discomfort += o.discomfort[i];
      hvac += o.followers[i].e;
      dev += std::abs(o.next.t[i] - ex.scenario.t_opt[k][i]);
    }
  }
  const double tol = 1e-9;
  CHECK(r.pme_profit == Approx(profit).epsilon(tol));
  CHECK(r.energy_cost == Approx(energy).epsilon(tol));
  CHECK(r.discomfort_cost == Approx(discomfort).epsilon(tol));
  CHECK(r.hvac_total == Approx(hvac).epsilon(tol));
  CHECK(r.aggregate_cost == Approx(discomfort + energy - profit).epsilon(tol));
  CHECK(r.tatd == Approx(dev / (ex.scenario.n * ex.scenario.slots)).epsilon(tol));
}

TEST_CASE("queue updates") {
  const Experiment ex = test::desk_experiment();
  test::Rng rng(101);
  for (int j = 0; j < 500; ++j) {
    const SlotState st = test::random_state(rng, ex);
    const std::size_t k = rng.index(ex.scenario.slots);
    std::vector<FollowerAction> fa;
    for (std::size_t i = 0; i < ex.scenario.n; ++i) fa.push_back({rng.uniform(0, 5), 0.0});
    const LeaderAction la{8, 4, rng.coin(0.2) ? 0.0 : rng.uniform(-1, 1)};
    const SlotState next = update_queues(st, fa, la, ex.scenario, k, ex.setup);
    for (std::size_t i = 0; i < ex.scenario.n; ++i) {
      const double g = ex.setup.nanogrid_controls[i].gamma_shift;
      REQUIRE(std::abs(next.h[i] - (next.t[i] + g)) <=
              1e-12 * (1 + std::abs(next.t[i]) + std::abs(g)));
      REQUIRE(next.t[i] ==
              Approx(thermal_step(st.t[i], ex.scenario.t_out[k][i], fa[i].e,
                                  ex.setup.nanogrids[i])).epsilon(1e-15));
    }
    REQUIRE(next.e_batt == st.e_batt + la.y);
    if (la.y == 0.0) REQUIRE(next.b == st.b);
  }
}

TEST_CASE("initial state") {
  const Experiment ex = test::desk_experiment();
  const SlotState s = initial_state(ex.scenario, ex.setup);
  CHECK(s.t[0] == Approx(71.5));
  CHECK(s.e_batt == Approx(9.0));
  CHECK(s.b == Approx(9.0 + ex.setup.pme_control.theta));
  RunOptions bad;
  bad.t0 = std::vector<double>(ex.scenario.n, 60.0);
  CHECK_THROWS_AS(initial_state(ex.scenario, ex.setup, bad), ConfigError);
  bad = RunOptions{};
  bad.e0 = 20.0;
  CHECK_THROWS_AS(initial_state(ex.scenario, ex.setup, bad), ConfigError);
}

TEST_CASE("violations are counted and optionally raised") {
  const Experiment ex = test::desk_experiment();
  // Never heating lets the rooms cool to the outdoor level.
  const SlotPolicy cold = [&](const SlotState& st, std::size_t k) {
    SlotDecision d;
    d.leader = {ex.scenario.m_s[k], ex.scenario.m_b[k], 0.0};
    for (std::size_t i = 0; i < st.t.size(); ++i)
      d.followers.push_back({0.0, ex.scenario.d[k][i] - ex.scenario.rp[k][i]});
    return d;
  };
  const RunReport r = run_policy(ex.scenario, ex.setup, cold);
  CHECK(r.comfort_violations > 0);
  RunOptions strict;
  strict.throw_on_violation = true;
  CHECK_THROWS_AS(run_policy(ex.scenario, ex.setup, cold, strict), InvariantError);
}

TEST_CASE("setup validation rejects controls beyond their bounds") {
  Experiment ex = test::desk_experiment();
  CHECK_NOTHROW(validate_setup(ex.scenario, ex.setup));
  ex.setup.nanogrid_controls[2].v *= 1.5;
  CHECK_THROWS_WITH(validate_setup(ex.scenario, ex.setup),
                    Catch::Matchers::ContainsSubstring("V_i^max"));
  ex = test::desk_experiment();
  ex.setup.pme_control.theta += 5.0;
  CHECK_THROWS_AS(validate_setup(ex.scenario, ex.setup), ConfigError);
}
