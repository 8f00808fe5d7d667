#pragma once

#include <vector>

#include "ems/domain.hpp"
#include "ems/nanogrid.hpp"

namespace ems {

struct LeaderBounds {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double v_p_max = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double omega_p_max = 0.0;
};

struct SubgradientSet {
  double g_ps = 0.0;
  double g_pb = 0.0;
  double g_y = 0.0;
};

struct LeaderEnvelope {
  double m_s_max = 0.0;
  double m_b_min = 0.0;
};

LeaderEnvelope leader_envelope(const Scenario& scenario);

Interval charge_box(const PmeParams& params);

// Grid price at the margin of the residual: m_s when the PME buys from the
// main grid, m_b otherwise (a zero residual takes m_b).
double marginal_grid_price(double residual, const PmeSlot& slot);

// pro' = B*y - V_P * pro. Throws DomainError when the price band or the
// charge box is violated.
double p4_objective(const LeaderAction& action, const std::vector<double>& tps, double b,
                    const PmeSlot& slot, const PmeControl& control, const PmeParams& params);

// Closed-form minimizer of (b + V_P*m)*y + V_P*c_b*y^2/2 over the charge box.
double optimal_charge(double b, double m_price, const PmeControl& control,
                      const PmeParams& params);
double optimal_charge(double b, double m_price, const PmeControl& control,
                      const PmeParams& params, const Interval& box);

// Exact minimizer of pro' in y for fixed injections, resolving which grid
// price applies on each side of the zero-residual point.
double optimal_charge_exact(double b, double sum_tp, const PmeSlot& slot,
                            const PmeControl& control, const PmeParams& params,
                            const Interval& box);

// sens_ps[i] / sens_pb[i] are -d tp_i / d p_s and -d tp_i / d p_b at the
// current responses: hbar_i on an interior branch, zero elsewhere.
SubgradientSet subgradients(const LeaderAction& action, const std::vector<double>& tps,
                            const std::vector<double>& sens_ps,
                            const std::vector<double>& sens_pb, double b, const PmeSlot& slot,
                            const PmeControl& control, const PmeParams& params);

LeaderBounds compute_bounds(const PmeParams& params, double v_p, const LeaderEnvelope& envelope);
// Same, with v_p taken at the computed V_P^max.
LeaderBounds compute_bounds(const PmeParams& params, const LeaderEnvelope& envelope);

void validate_control(const PmeControl& control, const LeaderBounds& bounds);

}  // namespace ems
