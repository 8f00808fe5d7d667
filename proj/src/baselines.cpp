#include "ems/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace ems {

const std::vector<CaseId>& all_cases() {
  static const std::vector<CaseId> cases{CaseId::FixedPointForecastPrice,
                                         CaseId::FixedPointRealTimePrice, CaseId::MyopicGame,
                                         CaseId::Proposed, CaseId::SocialWelfare};
  return cases;
}

int case_number(CaseId id) { return static_cast<int>(id) + 1; }

std::string case_name(CaseId id) {
  switch (id) {
    case CaseId::FixedPointForecastPrice: return "fixed_point_forecast_price";
    case CaseId::FixedPointRealTimePrice: return "fixed_point_real_time_price";
    case CaseId::MyopicGame: return "myopic_game";
    case CaseId::Proposed: return "proposed";
    case CaseId::SocialWelfare: return "social_welfare";
  }
  return "unknown";
}

CaseId parse_case(const std::string& text) {
  for (CaseId id : all_cases())
    if (text == case_name(id) || text == std::to_string(case_number(id))) return id;
  throw ConfigError("unknown case '" + text + "' (use 1-5 or a case name)");
}

double fixed_point_consumption(const FollowerProblem& pb) {
  const auto& p = pb.params;
  const double base = thermal_step(pb.t, pb.slot.t_out, 0.0, p);
  const double e = (pb.slot.t_opt - base) / ((1.0 - p.epsilon) * p.signed_eta());
  FollowerProblem plain = pb;
  plain.comfort_box = false;
  return feasible_box(plain).clamp(e);
}

double social_welfare_cost(const std::vector<double>& e, double y, const SlotState& state,
                           const Scenario& scenario, std::size_t k, const SystemSetup& setup) {
  double sum_tp = 0.0;
  double discomfort = 0.0;
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const auto& p = setup.nanogrids[i];
    sum_tp += scenario.d[k][i] + e[i] - scenario.rp[k][i];
    const double dev = thermal_step(state.t[i], scenario.t_out[k][i], e[i], p) -
                       scenario.t_opt[k][i];
    discomfort += p.gamma * dev * dev;
  }
  const double r = sum_tp - scenario.g_t[k] + y;
  return battery_cost(y, setup.pme.c_b) +
         grid_settlement(r, scenario.m_s[k], scenario.m_b[k]) + discomfort;
}

double welfare_objective(const std::vector<double>& e, double y, const SlotState& state,
                         const Scenario& scenario, std::size_t k, const SystemSetup& setup) {
  double drift = state.b * y / setup.pme_control.v_p;
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const auto& p = setup.nanogrids[i];
    drift += p.epsilon * (1.0 - p.epsilon) * state.h[i] * p.signed_eta() * e[i] /
             setup.nanogrid_controls[i].v;
  }
  return drift + social_welfare_cost(e, y, state, scenario, k, setup);
}

namespace {

struct PricedResponse {
  std::vector<double> e;
  double y = 0.0;
  double residual = 0.0;
};

// Every agent's minimizer when grid energy is valued at lambda.
PricedResponse respond_to_price(double lambda, const SlotState& state,
                                const Scenario& scenario, std::size_t k,
                                const SystemSetup& setup) {
  PricedResponse out;
  double sum_tp = 0.0;
  for (std::size_t i = 0; i < scenario.n; ++i) {
    const auto& p = setup.nanogrids[i];
    FollowerProblem fp;
    fp.t = state.t[i];
    fp.h = state.h[i];
    fp.slot = scenario.nanogrid_slot(k, i);
    fp.params = p;
    fp.control = setup.nanogrid_controls[i];
    const Interval box = feasible_box(fp);
    if (box.empty()) throw DomainError("empty feasibility box in the welfare slot problem");
    const double om = 1.0 - p.epsilon;
    const double s = p.signed_eta();
    const double base = thermal_step(state.t[i], fp.slot.t_out, 0.0, p);
    const double quad = p.gamma * om * om * s * s;
    const double lin = p.epsilon * om * state.h[i] * s / fp.control.v +
                       2.0 * p.gamma * om * s * (base - fp.slot.t_opt) + lambda;
    double e;
    if (quad > 0.0)
      e = box.clamp(-lin / (2.0 * quad));
    else
      e = lin > 0.0 ? box.lo : box.hi;
    out.e.push_back(e);
    sum_tp += fp.slot.d + e - fp.slot.rp;
  }
  out.y = optimal_charge(state.b, lambda, setup.pme_control, setup.pme);
  out.residual = sum_tp - scenario.g_t[k] + out.y;
  return out;
}

}  // namespace

WelfareSolution solve_welfare_slot(const SlotState& state, const Scenario& scenario,
                                   std::size_t k, const SystemSetup& setup) {
  // The grid settlement is the only coupling term. Its marginal price lies in
  // [m_b, m_s], and the residual is nonincreasing in that price, so the
  // clearing price is found by bisection.
  const double m_s = scenario.m_s[k];
  const double m_b = scenario.m_b[k];
  double lambda;
  const PricedResponse at_ms = respond_to_price(m_s, state, scenario, k, setup);
  const PricedResponse at_mb = respond_to_price(m_b, state, scenario, k, setup);
  if (at_ms.residual >= 0.0) {
    lambda = m_s;
  } else if (at_mb.residual <= 0.0) {
    lambda = m_b;
  } else {
    double lo = m_b;
    double hi = m_s;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (respond_to_price(mid, state, scenario, k, setup).residual > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    lambda = 0.5 * (lo + hi);
  }
  const PricedResponse r = respond_to_price(lambda, state, scenario, k, setup);
  WelfareSolution sol{r.e, r.y, lambda};

  // Snapping the battery onto the zero-residual point removes the residual
  // left by the finite bisection whenever that is an improvement.
  double sum_tp = 0.0;
  for (std::size_t i = 0; i < scenario.n; ++i)
    sum_tp += scenario.d[k][i] + sol.e[i] - scenario.rp[k][i];
  const double y_exact = optimal_charge_exact(state.b, sum_tp, scenario.pme_slot(k),
                                              setup.pme_control, setup.pme,
                                              charge_box(setup.pme));
  if (welfare_objective(sol.e, y_exact, state, scenario, k, setup) <
      welfare_objective(sol.e, sol.y, state, scenario, k, setup))
    sol.y = y_exact;
  return sol;
}

namespace {

std::vector<FollowerProblem> follower_problems(const SlotState& state, const Scenario& scenario,
                                               std::size_t k, const SystemSetup& setup) {
  return make_slot_game(state, scenario, k, setup).followers;
}

std::vector<FollowerAction> actions_from(const std::vector<FollowerProblem>& fps,
                                         const std::vector<double>& e) {
  std::vector<FollowerAction> out;
  for (std::size_t i = 0; i < fps.size(); ++i)
    out.push_back({e[i], fps[i].slot.d + e[i] - fps[i].slot.rp});
  return out;
}

}  // namespace

RunReport run_case(CaseId id, const Scenario& scenario, const SystemSetup& setup,
                   const GameConfig& config, const RunOptions& options) {
  validate_setup(scenario, setup);
  SlotPolicy policy;
  switch (id) {
    case CaseId::Proposed:
      return run(scenario, setup, config, options);

    case CaseId::FixedPointForecastPrice:
      policy = [&](const SlotState& state, std::size_t k) {
        const auto fps = follower_problems(state, scenario, k, setup);
        std::vector<double> e;
        for (const auto& fp : fps) e.push_back(fixed_point_consumption(fp));
        const auto followers = actions_from(fps, e);
        double sum_tp = 0.0;
        for (const auto& f : followers) sum_tp += f.tp;
        const PmeSlot ps = scenario.pme_slot(k);
        LeaderAction leader{ps.m_s, ps.m_b,
                            optimal_charge_exact(state.b, sum_tp, ps, setup.pme_control,
                                                 setup.pme, charge_box(setup.pme))};
        return SlotDecision{leader, followers, true, 0, {}};
      };
      break;

    case CaseId::FixedPointRealTimePrice:
      policy = [&](const SlotState& state, std::size_t k) {
        SlotGame game = make_slot_game(state, scenario, k, setup);
        game.rule = FollowerRule::fixed;
        for (const auto& fp : game.followers) game.fixed_e.push_back(fixed_point_consumption(fp));
        const SlotSolution sol = solve_slot(game, config);
        return SlotDecision{sol.leader, sol.followers, sol.converged, sol.iterations, sol.trace};
      };
      break;

    case CaseId::MyopicGame:
      policy = [&](const SlotState& state, std::size_t k) {
        SlotGame game = make_slot_game(state, scenario, k, setup);
        game.rule = FollowerRule::myopic;
        game.b = 0.0;
        // Without the battery queue the hard energy limits bind directly.
        game.y_box = {std::max(-setup.pme.u_dmax, setup.pme.e_min - state.e_batt),
                      std::min(setup.pme.u_cmax, setup.pme.e_max_cap - state.e_batt)};
        const SlotSolution sol = solve_slot(game, config);
        return SlotDecision{sol.leader, sol.followers, sol.converged, sol.iterations, sol.trace};
      };
      break;

    case CaseId::SocialWelfare:
      policy = [&](const SlotState& state, std::size_t k) {
        const WelfareSolution w = solve_welfare_slot(state, scenario, k, setup);
        const auto fps = follower_problems(state, scenario, k, setup);
        // Internal payments settle at the shadow price and cancel out.
        return SlotDecision{{w.shadow_price, w.shadow_price, w.y}, actions_from(fps, w.e),
                            true, 0, {}};
      };
      break;
  }
  return run_policy(scenario, setup, policy, options);
}

}  // namespace ems
