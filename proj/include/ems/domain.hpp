#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ems {

// Raised for parameter sets or scenarios that cannot be used at all.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an operation is evaluated outside its feasible region.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class HvacMode { heating, cooling };

struct NanogridParams {
  double epsilon = 0.95;  // inertial coefficient
  double eta = 15.0;      // degF per kWh
  double e_max = 5.0;     // kWh per slot
  double t_min = 66.0;
  double t_max = 77.0;
  double l_max = 30.0;    // kWh per slot
  double gamma = 0.01;    // cent per degF^2
  HvacMode mode = HvacMode::heating;

  void validate() const;
  // eta with the mode sign applied: +eta heating, -eta cooling.
  double signed_eta() const { return mode == HvacMode::heating ? eta : -eta; }
};

struct NanogridControl {
  double v = 0.0;            // Lyapunov weight V_i
  double gamma_shift = 0.0;  // queue shift Gamma_i
};

struct PmeParams {
  double e_min = 2.0;
  double e_max_cap = 16.0;
  double u_cmax = 1.0;
  double u_dmax = 1.0;
  double c_b = 0.01;  // cent per kWh^2

  void validate() const;
};

struct PmeControl {
  double v_p = 0.0;
  double theta = 0.0;
};

// Exogenous data of one nanogrid in one slot. t_opt is the comfort target
// for the temperature reached at the end of the slot.
struct NanogridSlot {
  double rp = 0.0;
  double d = 0.0;
  double t_out = 0.0;
  double t_opt = 0.0;
};

struct PmeSlot {
  double m_s = 0.0;
  double m_b = 0.0;
  double g_t = 0.0;
};

struct Scenario {
  std::size_t n = 0;
  std::size_t slots = 0;
  // Indexed [slot][nanogrid].
  std::vector<std::vector<double>> rp, d, t_out, t_opt;
  std::vector<double> m_s, m_b, g_t;

  void validate() const;
  NanogridSlot nanogrid_slot(std::size_t k, std::size_t i) const {
    return {rp[k][i], d[k][i], t_out[k][i], t_opt[k][i]};
  }
  PmeSlot pme_slot(std::size_t k) const { return {m_s[k], m_b[k], g_t[k]}; }

  double t_out_min(std::size_t i) const;
  double t_out_max(std::size_t i) const;
  double t_opt_min(std::size_t i) const;
  double t_opt_max(std::size_t i) const;
  double m_s_max() const;
  double m_b_min() const;
};

// Checks the three comfort-guarantee assumptions of nanogrid i against the
// scenario's outdoor temperature envelope.
void check_assumptions(const NanogridParams& params, const Scenario& scenario,
                       std::size_t i);

struct LeaderAction {
  double p_s = 0.0;
  double p_b = 0.0;
  double y = 0.0;
};

struct FollowerAction {
  double e = 0.0;
  double tp = 0.0;
};

struct SlotState {
  std::vector<double> t;  // indoor temperature per nanogrid
  std::vector<double> h;  // virtual temperature queue per nanogrid
  double e_batt = 0.0;
  double b = 0.0;
};

double thermal_step(double t, double t_out, double e, const NanogridParams& params);
double thermal_step(double t, double t_out, double e, double epsilon, double eta,
                    HvacMode mode = HvacMode::heating);

double bilinear_trade_cost(double tp, double p_s, double p_b);
double battery_cost(double y, double c_b);

// Net residual exchanged with the main grid: sum(tp) - g_t + y.
double grid_residual(const std::vector<double>& tps, double g_t, double y);
double grid_settlement(double residual, double m_s, double m_b);

double pme_profit(const LeaderAction& action, const std::vector<double>& tps,
                  const PmeSlot& slot, double c_b);

}  // namespace ems
