#include <catch2/catch_amalgamated.hpp>

#include "ems/pme.hpp"
#include "support.hpp"

using namespace ems;
using Catch::Approx;

namespace {

// pro' as a function of y alone, written from its definition.
double y_objective(double y, double b, double sum_tp, const PmeSlot& s, double v_p, double c_b) {
  const double r = sum_tp - s.g_t + y;
  const double grid = r > 0.0 ? s.m_s * r : s.m_b * r;
  return b * y + v_p * (grid + 0.5 * c_b * y * y);
}

}  // namespace

TEST_CASE("pro' examples") {
  const PmeParams params;
  CHECK(p4_objective({5, 3, 0}, {0.0}, 0.0, {12, 3, 0}, {0.5, 0}, params) == 0.0);
  // Hand evaluation: residual 1.5 at m_s = 12, revenue 20, wear 0.00125.
  CHECK(p4_objective({10, 5, 0.5}, {2.0}, -10.0, {12, 3, 1}, {0.5, 0}, params) ==
        Approx(-5.999375).epsilon(1e-12));
}

TEST_CASE("pro' equals B*y - V_P*pro") {
  test::Rng rng(41);
  PmeParams params;
  for (int j = 0; j < 2000; ++j) {
    const PmeSlot s{rng.uniform(6, 20), rng.uniform(1, 5), rng.uniform(-15, 25)};
    const double p_b = rng.uniform(s.m_b, s.m_s - 0.01);
    const LeaderAction a{rng.uniform(p_b + 0.01, s.m_s), p_b, rng.uniform(-1, 1)};
    std::vector<double> tps;
    for (int i = 0; i < 5; ++i) tps.push_back(rng.uniform(-5, 8));
    const double b = rng.uniform(-30, 5);
    const PmeControl c{rng.uniform(0.01, 1.0), 0.0};
    const double lhs = p4_objective(a, tps, b, s, c, params);
    const double rhs = b * a.y - c.v_p * pme_profit(a, tps, s, params.c_b);
    REQUIRE(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("pro' rejects actions outside the band or box") {
  const PmeParams params;
  CHECK_THROWS_AS(p4_objective({13, 5, 0}, {1.0}, 0, {12, 3, 0}, {1, 0}, params), DomainError);
  CHECK_THROWS_AS(p4_objective({10, 2, 0}, {1.0}, 0, {12, 3, 0}, {1, 0}, params), DomainError);
  CHECK_THROWS_AS(p4_objective({10, 5, 1.5}, {1.0}, 0, {12, 3, 0}, {1, 0}, params),
                  DomainError);
}

TEST_CASE("marginal grid price") {
  const PmeSlot s{12, 3, 0};
  CHECK(marginal_grid_price(1.0, s) == 12.0);
  CHECK(marginal_grid_price(-1.0, s) == 3.0);
  CHECK(marginal_grid_price(0.0, s) == 3.0);
}

TEST_CASE("optimal charge examples") {
  const PmeParams params;
  const PmeControl c{0.5, 0.0};
  CHECK(optimal_charge(-0.5 * 7.0, 7.0, c, params) == Approx(0.0).margin(1e-15));
  CHECK(optimal_charge(1e3, 7.0, c, params) == -params.u_dmax);
  CHECK(optimal_charge(-1e3, 7.0, c, params) == params.u_cmax);
  PmeParams flat = params;
  flat.c_b = 0.0;
  CHECK(optimal_charge(1.0, 7.0, c, flat) == -flat.u_dmax);
  CHECK(optimal_charge(-10.0, 7.0, c, flat) == flat.u_cmax);
}

TEST_CASE("optimal charge matches a grid search") {
  test::Rng rng(43);
  for (int j = 0; j < 500; ++j) {
    PmeParams p;
    p.c_b = rng.coin(0.2) ? 0.0 : rng.uniform(0.001, 5.0);
    p.u_cmax = rng.uniform(0.2, 3.0);
    p.u_dmax = rng.uniform(0.2, 3.0);
    const PmeControl c{rng.uniform(0.01, 2.0), 0.0};
    const double m = rng.uniform(1, 20);
    const double b = rng.uniform(-40, 10);
    auto f = [&](double y) { return (b + c.v_p * m) * y + 0.5 * c.v_p * p.c_b * y * y; };
    const double y = optimal_charge(b, m, c, p);
    const auto grid = test::grid_minimum(f, -p.u_dmax, p.u_cmax, 20001);
    REQUIRE(f(y) <= grid.f + 1e-10);
  }
}

TEST_CASE("exact charge resolves the grid price on both sides of zero residual") {
  test::Rng rng(47);
  for (int j = 0; j < 500; ++j) {
    PmeParams p;
    p.c_b = rng.uniform(0.0, 2.0);
    const PmeControl c{rng.uniform(0.01, 2.0), 0.0};
    const PmeSlot s{rng.uniform(6, 20), rng.uniform(1, 5), rng.uniform(-3, 3)};
    const double sum_tp = rng.uniform(-3, 3);
    const double b = rng.uniform(-40, 10);
    const Interval box = charge_box(p);
    const double y = optimal_charge_exact(b, sum_tp, s, c, p, box);
    auto f = [&](double yy) { return y_objective(yy, b, sum_tp, s, c.v_p, p.c_b); };
    const auto grid = test::grid_minimum(f, box.lo, box.hi, 20001);
    REQUIRE(y >= box.lo);
    REQUIRE(y <= box.hi);
    REQUIRE(f(y) <= grid.f + 1e-10 * (1.0 + std::abs(grid.f)));
  }
}

TEST_CASE("subgradients with no trade") {
  const PmeParams params;
  const PmeControl c{0.4, 0.0};
  const PmeSlot s{12, 3, 0.5};
  const LeaderAction a{8, 4, 0.3};
  const SubgradientSet g = subgradients(a, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, -2.0, s, c, params);
  CHECK(g.g_ps == 0.0);
  CHECK(g.g_pb == 0.0);
  // Residual is 0.3 - 0.5 < 0, so the margin is m_b.
  CHECK(g.g_y == Approx(-2.0 + params.c_b * 0.4 * 0.3 + 0.4 * 3.0));
}

TEST_CASE("subgradient signs") {
  const PmeParams params;
  const PmeControl c{0.4, 0.0};
  const PmeSlot s{12, 3, 0.0};
  const SubgradientSet g =
      subgradients({8, 4, 0}, {2.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}, 0.0, s, c, params);
  CHECK(g.g_ps == Approx(-0.4 * 2.0));
  CHECK(g.g_pb == Approx(0.4 * 1.0));
}

TEST_CASE("subgradients match central differences for price-inelastic followers") {
  test::Rng rng(53);
  const PmeParams params;
  for (int j = 0; j < 500; ++j) {
    const PmeSlot s{rng.uniform(8, 20), rng.uniform(1, 5), rng.uniform(-15, 25)};
    const double p_b = rng.uniform(s.m_b + 0.1, s.m_s - 0.2);
    const LeaderAction a{rng.uniform(p_b + 0.1, s.m_s - 0.05), p_b, rng.uniform(-0.9, 0.9)};
    std::vector<double> tps;
    for (int i = 0; i < 4; ++i) tps.push_back(rng.uniform(-3, 6));
    const double b = rng.uniform(-30, 5);
    const PmeControl c{rng.uniform(0.05, 1.0), 0.0};
    const double r = grid_residual(tps, s.g_t, a.y);
    const double h = 1e-6;
    if (std::abs(r) < 10 * h) continue;
    const std::vector<double> zero(tps.size(), 0.0);
    const SubgradientSet g = subgradients(a, tps, zero, zero, b, s, c, params);
    auto f = [&](LeaderAction x) { return p4_objective(x, tps, b, s, c, params); };
    auto fd = [&](double LeaderAction::*field) {
      LeaderAction up = a, dn = a;
      up.*field += h;
      dn.*field -= h;
      return (f(up) - f(dn)) / (2 * h);
    };
    REQUIRE(fd(&LeaderAction::p_s) == Approx(g.g_ps).epsilon(1e-6).margin(1e-6));
    REQUIRE(fd(&LeaderAction::p_b) == Approx(g.g_pb).epsilon(1e-6).margin(1e-6));
    REQUIRE(fd(&LeaderAction::y) == Approx(g.g_y).epsilon(1e-6).margin(1e-6));
  }
}

TEST_CASE("leader bound examples") {
  const PmeParams params;
  const LeaderEnvelope env{17.0, 3.0};
  const LeaderBounds b = compute_bounds(params, env);
  CHECK(b.c_max == Approx(0.01));
  CHECK(b.c_min == Approx(-0.01));
  CHECK(b.c_min == -b.c_max);
  CHECK(b.v_p_max == Approx((16.0 - 2.0 - 2.0) / (14.0 + 0.02)).epsilon(1e-12));
  CHECK(b.v_p_max > 0.0);
  CHECK(b.theta_min <= b.theta_max);
  CHECK(b.omega_p_max == Approx(0.5));
  CHECK(b.theta_min == Approx(b.theta_max).epsilon(1e-12));
}

TEST_CASE("theta bounds are ordered below V_P^max") {
  test::Rng rng(59);
  for (int j = 0; j < 2000; ++j) {
    PmeParams p;
    p.e_min = rng.uniform(0, 5);
    p.u_cmax = rng.uniform(0.1, 3);
    p.u_dmax = rng.uniform(0.1, 3);
    p.e_max_cap = p.e_min + p.u_cmax + p.u_dmax + rng.uniform(0.1, 20);
    p.c_b = rng.uniform(0, 1);
    const LeaderEnvelope env{rng.uniform(5, 30), rng.uniform(0.5, 5)};
    const double v_p = compute_bounds(p, env).v_p_max * rng.uniform(0.0, 1.0);
    const LeaderBounds b = compute_bounds(p, v_p, env);
    REQUIRE(b.theta_min <= b.theta_max + 1e-12 * (1.0 + std::abs(b.theta_max)));
  }
}

TEST_CASE("battery guarantee of a single step under admissible controls") {
  test::Rng rng(61);
  for (int j = 0; j < 5000; ++j) {
    PmeParams p;
    p.c_b = rng.uniform(0, 0.1);
    const PmeSlot s{rng.uniform(6, 20), rng.uniform(1, 5), rng.uniform(-15, 25)};
    const LeaderEnvelope env{20.0, 1.0};
    const double v_p = compute_bounds(p, env).v_p_max * rng.uniform(0.05, 1.0);
    const LeaderBounds b = compute_bounds(p, v_p, env);
    const double theta = rng.uniform(b.theta_min, b.theta_max);
    const double e = rng.uniform(p.e_min, p.e_max_cap);
    const double y = optimal_charge_exact(e + theta, rng.uniform(-10, 20), s, {v_p, theta}, p,
                                          charge_box(p));
    REQUIRE(e + y >= p.e_min - 1e-12);
    REQUIRE(e + y <= p.e_max_cap + 1e-12);
  }
}

TEST_CASE("leader control validation") {
  const PmeParams params;
  const LeaderBounds b = compute_bounds(params, {17.0, 3.0});
  CHECK_NOTHROW(validate_control({b.v_p_max, b.theta_min}, b));
  CHECK_THROWS_WITH(validate_control({b.v_p_max * 1.1, b.theta_min}, b),
                    Catch::Matchers::ContainsSubstring("V_P^max"));
  CHECK_THROWS_AS(validate_control({b.v_p_max, b.theta_min + 1.0}, b), ConfigError);
}
