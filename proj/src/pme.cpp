#include "ems/pme.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace ems {

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double y_cost(double y, double b, double sum_tp, const PmeSlot& slot, const PmeControl& control,
              const PmeParams& params) {
  const double r = sum_tp - slot.g_t + y;
  return b * y + control.v_p * (grid_settlement(r, slot.m_s, slot.m_b) +
                                battery_cost(y, params.c_b));
}

}  // namespace

LeaderEnvelope leader_envelope(const Scenario& scenario) {
  return {scenario.m_s_max(), scenario.m_b_min()};
}

Interval charge_box(const PmeParams& params) { return {-params.u_dmax, params.u_cmax}; }

double marginal_grid_price(double residual, const PmeSlot& slot) {
  return residual > 0.0 ? slot.m_s : slot.m_b;
}

double p4_objective(const LeaderAction& a, const std::vector<double>& tps, double b,
                    const PmeSlot& slot, const PmeControl& control, const PmeParams& params) {
  const double tol = 1e-12 * (1.0 + std::abs(slot.m_s));
  if (a.p_b < slot.m_b - tol || a.p_s > slot.m_s + tol || !(a.p_b < a.p_s))
    throw DomainError("leader prices violate m_b <= p_b < p_s <= m_s (p_b = " +
                      describe(a.p_b) + ", p_s = " + describe(a.p_s) + ")");
  const double ytol = 1e-12 * (1.0 + std::abs(a.y));
  if (a.y < -params.u_dmax - ytol || a.y > params.u_cmax + ytol)
    throw DomainError("charge y = " + describe(a.y) + " outside [-u_dmax, u_cmax]");
  return b * a.y - control.v_p * pme_profit(a, tps, slot, params.c_b);
}

double optimal_charge(double b, double m, const PmeControl& control, const PmeParams& params,
                      const Interval& box) {
  const double lin = b + control.v_p * m;
  const double curv = control.v_p * params.c_b;
  if (curv <= 0.0) {
    if (lin > 0.0) return box.lo;
    if (lin < 0.0) return box.hi;
    return box.clamp(0.0);
  }
  if (lin >= -curv * box.lo) return box.lo;
  if (lin <= -curv * box.hi) return box.hi;
  return -lin / curv;
}

double optimal_charge(double b, double m, const PmeControl& control, const PmeParams& params) {
  return optimal_charge(b, m, control, params, charge_box(params));
}

double optimal_charge_exact(double b, double sum_tp, const PmeSlot& slot,
                            const PmeControl& control, const PmeParams& params,
                            const Interval& box) {
  const double y0 = slot.g_t - sum_tp;  // residual is zero here
  std::array<double, 5> options{box.lo, box.hi, box.clamp(y0), box.lo, box.hi};
  std::size_t count = 3;
  const Interval buy{std::max(box.lo, y0), box.hi};
  if (!buy.empty()) options[count++] = optimal_charge(b, slot.m_s, control, params, buy);
  const Interval sell{box.lo, std::min(box.hi, y0)};
  if (!sell.empty()) options[count++] = optimal_charge(b, slot.m_b, control, params, sell);
  double best = options[0];
  double best_cost = y_cost(best, b, sum_tp, slot, control, params);
  for (std::size_t j = 1; j < count; ++j) {
    const double c = y_cost(options[j], b, sum_tp, slot, control, params);
    if (c < best_cost || (c == best_cost && options[j] < best)) {
      best_cost = c;
      best = options[j];
    }
  }
  return best;
}

SubgradientSet subgradients(const LeaderAction& a, const std::vector<double>& tps,
                            const std::vector<double>& sens_ps,
                            const std::vector<double>& sens_pb, double b, const PmeSlot& slot,
                            const PmeControl& control, const PmeParams& params) {
  const double vp = control.v_p;
  const double m = marginal_grid_price(grid_residual(tps, slot.g_t, a.y), slot);
  SubgradientSet g;
  for (std::size_t i = 0; i < tps.size(); ++i) {
    if (tps[i] >= 0.0) {
      g.g_ps += -vp * tps[i] + (vp * a.p_s - vp * m) * sens_ps[i];
    } else {
      g.g_pb += -vp * tps[i] + (vp * a.p_b - vp * m) * sens_pb[i];
    }
  }
  g.g_y = b + params.c_b * vp * a.y + vp * m;
  return g;
}

LeaderBounds compute_bounds(const PmeParams& params, double v_p, const LeaderEnvelope& env) {
  params.validate();
  LeaderBounds lb;
  lb.c_min = std::min(params.c_b * params.u_cmax, -params.c_b * params.u_dmax);
  lb.c_max = std::max(params.c_b * params.u_cmax, -params.c_b * params.u_dmax);
  const double denom = env.m_s_max - env.m_b_min + lb.c_max - lb.c_min;
  if (!(denom > 0.0))
    throw ConfigError("V_P^max undefined: price spread plus battery marginal range is zero");
  lb.v_p_max = (params.e_max_cap - params.e_min - (params.u_cmax + params.u_dmax)) / denom;
  lb.theta_min = params.u_cmax - params.e_max_cap - v_p * env.m_b_min - v_p * lb.c_min;
  lb.theta_max = -params.u_dmax - params.e_min - v_p * env.m_s_max - v_p * lb.c_max;
  lb.omega_p_max = 0.5 * std::max(params.u_cmax * params.u_cmax, params.u_dmax * params.u_dmax);
  return lb;
}

LeaderBounds compute_bounds(const PmeParams& params, const LeaderEnvelope& env) {
  const LeaderBounds probe = compute_bounds(params, 1.0, env);
  return compute_bounds(params, probe.v_p_max, env);
}

void validate_control(const PmeControl& control, const LeaderBounds& lb) {
  if (!(control.v_p > 0.0)) throw ConfigError("v_p must be positive");
  if (control.v_p > lb.v_p_max * (1.0 + 1e-12))
    throw ConfigError("v_p = " + describe(control.v_p) + " exceeds V_P^max = " +
                      describe(lb.v_p_max));
  const double tol = 1e-9 * (1.0 + std::abs(control.theta));
  if (control.theta < lb.theta_min - tol || control.theta > lb.theta_max + tol)
    throw ConfigError("theta = " + describe(control.theta) + " outside [" +
                      describe(lb.theta_min) + ", " + describe(lb.theta_max) + "]");
}

}  // namespace ems
