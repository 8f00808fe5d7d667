#include "ems/simulator.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace ems {

SystemSetup make_default_setup(const Scenario& scenario,
                               const std::vector<NanogridParams>& nanogrids,
                               const PmeParams& pme) {
  if (nanogrids.size() != scenario.n)
    throw ConfigError("nanogrid parameter count does not match the scenario");
  SystemSetup setup;
  setup.nanogrids = nanogrids;
  setup.pme = pme;
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const FollowerBounds b = compute_bounds(nanogrids[i], follower_envelope(scenario, i));
    setup.nanogrid_controls.push_back({b.v_max, b.gamma_min});
  }
  const LeaderBounds lb = compute_bounds(pme, leader_envelope(scenario));
  setup.pme_control = {lb.v_p_max, lb.theta_min};
  return setup;
}

void validate_setup(const Scenario& scenario, const SystemSetup& setup) {
  scenario.validate();
  if (setup.nanogrids.size() != scenario.n || setup.nanogrid_controls.size() != scenario.n)
    throw ConfigError("nanogrid parameter or control count does not match the scenario");
  for (std::size_t i = 0; i < scenario.n; ++i) {
    setup.nanogrids[i].validate();
    check_assumptions(setup.nanogrids[i], scenario, i);
    const FollowerBounds b = compute_bounds(setup.nanogrids[i], setup.nanogrid_controls[i].v,
                                            follower_envelope(scenario, i));
    try {
      validate_control(setup.nanogrid_controls[i], b);
    } catch (const ConfigError& e) {
      throw ConfigError("nanogrid " + std::to_string(i) + ": " + e.what());
    }
  }
  setup.pme.validate();
  const LeaderBounds lb =
      compute_bounds(setup.pme, setup.pme_control.v_p, leader_envelope(scenario));
  validate_control(setup.pme_control, lb);
}

SlotState initial_state(const Scenario& scenario, const SystemSetup& setup,
                        const RunOptions& options) {
  if (options.t0 && options.t0->size() != scenario.n)
    throw ConfigError("initial temperature count does not match the scenario");
  SlotState s;
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const auto& p = setup.nanogrids[i];
    const double t = options.t0 ? options.t0->at(i) : 0.5 * (p.t_min + p.t_max);
    if (t < p.t_min || t > p.t_max)
      throw ConfigError("initial temperature of nanogrid " + std::to_string(i) +
                        " outside [t_min, t_max]");
    s.t.push_back(t);
    s.h.push_back(t + setup.nanogrid_controls[i].gamma_shift);
  }
  s.e_batt = options.e0 ? *options.e0 : 0.5 * (setup.pme.e_min + setup.pme.e_max_cap);
  if (s.e_batt < setup.pme.e_min || s.e_batt > setup.pme.e_max_cap)
    throw ConfigError("initial battery energy outside [e_min, e_max_cap]");
  s.b = s.e_batt + setup.pme_control.theta;
  return s;
}

SlotState update_queues(const SlotState& state, const std::vector<FollowerAction>& followers,
                        const LeaderAction& leader, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup) {
  SlotState next;
  next.t.resize(scenario.n);
  next.h.resize(scenario.n);
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const auto& p = setup.nanogrids[i];
    const double t_out = scenario.t_out[k][i];
    const double e = followers[i].e;
    next.t[i] = thermal_step(state.t[i], t_out, e, p);
    next.h[i] = p.epsilon * state.h[i] +
                (1.0 - p.epsilon) *
                    (setup.nanogrid_controls[i].gamma_shift + t_out + p.signed_eta() * e);
  }
  next.e_batt = state.e_batt + leader.y;
  next.b = state.b + leader.y;
  return next;
}

RunReport run_policy(const Scenario& scenario, const SystemSetup& setup,
                     const SlotPolicy& policy, const RunOptions& options) {
  RunReport report;
  report.initial = initial_state(scenario, setup, options);
  SlotState state = report.initial;
  const double tol = options.bound_tolerance;
  double abs_dev = 0.0;
  for (std::size_t k = 0; k < scenario.slots; ++k) {
    const auto start = std::chrono::steady_clock::now();
    SlotDecision dec = policy(state, k);
    const auto stop = std::chrono::steady_clock::now();
    SlotOutcome out;
    out.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out.trace = std::move(dec.trace);
    out.slot = k;
    out.leader = dec.leader;
    out.followers = dec.followers;
    out.converged = dec.converged;
    out.iterations = dec.iterations;
    out.next = update_queues(state, dec.followers, dec.leader, scenario, k, setup);

    std::vector<double> tps(scenario.n);
    for (std::size_t i = 0; i < scenario.n; ++i) {
      const auto& p = setup.nanogrids[i];
      tps[i] = dec.followers[i].tp;
      const double dev = out.next.t[i] - scenario.t_opt[k][i];
      out.trade_cost.push_back(bilinear_trade_cost(tps[i], dec.leader.p_s, dec.leader.p_b));
      out.discomfort.push_back(p.gamma * dev * dev);
      abs_dev += std::abs(dev);
      report.energy_cost += out.trade_cost.back();
      report.discomfort_cost += out.discomfort.back();
      report.hvac_total += dec.followers[i].e;
      if (out.next.t[i] < p.t_min - tol || out.next.t[i] > p.t_max + tol) {
        ++report.comfort_violations;
        if (options.throw_on_violation)
          throw InvariantError("indoor temperature of nanogrid " + std::to_string(i) +
                                   " left the comfort band at slot " + std::to_string(k),
                               k);
      }
    }
    const PmeSlot ps = scenario.pme_slot(k);
    out.residual = grid_residual(tps, ps.g_t, dec.leader.y);
    out.pme_profit = pme_profit(dec.leader, tps, ps, setup.pme.c_b);
    report.pme_profit += out.pme_profit;
    if (out.next.e_batt < setup.pme.e_min - tol || out.next.e_batt > setup.pme.e_max_cap + tol) {
      ++report.battery_violations;
      if (options.throw_on_violation)
        throw InvariantError("battery energy left [e_min, e_max_cap] at slot " +
                                 std::to_string(k),
                             k);
    }
    if (!dec.converged) ++report.nonconverged_slots;
    state = out.next;
    report.slots.push_back(std::move(out));
  }
  report.aggregate_cost = report.discomfort_cost + report.energy_cost - report.pme_profit;
  const double count = static_cast<double>(scenario.n * scenario.slots);
  report.tatd = count > 0.0 ? abs_dev / count : 0.0;
  return report;
}

RunReport run(const Scenario& scenario, const SystemSetup& setup, const GameConfig& config,
              const RunOptions& options) {
  validate_setup(scenario, setup);
  const SlotPolicy policy = [&](const SlotState& state, std::size_t k) {
    const SlotSolution sol = solve_slot(state, scenario, k, setup, config);
    return SlotDecision{sol.leader, sol.followers, sol.converged, sol.iterations, sol.trace};
  };
  return run_policy(scenario, setup, policy, options);
}

}  // namespace ems
