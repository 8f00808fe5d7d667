#include "ems/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ems {

namespace {

template <typename... Parts>
std::string concat(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

double column_min(const std::vector<std::vector<double>>& m, std::size_t i) {
  double v = m.at(0).at(i);
  for (const auto& row : m) v = std::min(v, row.at(i));
  return v;
}

double column_max(const std::vector<std::vector<double>>& m, std::size_t i) {
  double v = m.at(0).at(i);
  for (const auto& row : m) v = std::max(v, row.at(i));
  return v;
}

}  // namespace

void NanogridParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError(concat("epsilon must lie in (0, 1), got ", epsilon));
  if (!(eta > 0.0)) throw ConfigError(concat("eta must be positive, got ", eta));
  if (!(e_max > 0.0)) throw ConfigError(concat("e_max must be positive, got ", e_max));
  if (!(l_max > 0.0)) throw ConfigError(concat("l_max must be positive, got ", l_max));
  if (!(gamma >= 0.0)) throw ConfigError(concat("gamma must be nonnegative, got ", gamma));
  if (!(t_min < t_max))
    throw ConfigError(concat("t_min must be below t_max, got ", t_min, " >= ", t_max));
}

void PmeParams::validate() const {
  if (!(e_min < e_max_cap))
    throw ConfigError(concat("e_min must be below e_max_cap, got ", e_min, " >= ", e_max_cap));
  if (!(u_cmax > 0.0)) throw ConfigError("u_cmax must be positive");
  if (!(u_dmax > 0.0)) throw ConfigError("u_dmax must be positive");
  if (!(c_b >= 0.0)) throw ConfigError("c_b must be nonnegative");
  if (!(e_max_cap - e_min > u_cmax + u_dmax))
    throw ConfigError("battery capacity gap e_max_cap - e_min must exceed u_cmax + u_dmax");
}

void Scenario::validate() const {
  if (slots == 0) throw ConfigError("scenario has no slots");
  auto check_matrix = [&](const std::vector<std::vector<double>>& m, const char* name) {
    if (m.size() != slots)
      throw ConfigError(concat("series ", name, " has ", m.size(), " slots, expected ", slots));
    for (std::size_t k = 0; k < slots; ++k) {
      if (m[k].size() != n)
        throw ConfigError(concat("series ", name, " at slot ", k, " has ", m[k].size(),
                                 " columns, expected ", n));
      for (double v : m[k])
        if (!std::isfinite(v))
          throw ConfigError(concat("series ", name, " has a non-finite value at slot ", k));
    }
  };
  auto check_vector = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != slots)
      throw ConfigError(concat("series ", name, " has ", v.size(), " slots, expected ", slots));
    for (std::size_t k = 0; k < slots; ++k)
      if (!std::isfinite(v[k]))
        throw ConfigError(concat("series ", name, " has a non-finite value at slot ", k));
  };
  check_matrix(rp, "rp");
  check_matrix(d, "d");
  check_matrix(t_out, "t_out");
  check_matrix(t_opt, "t_opt");
  check_vector(m_s, "m_s");
  check_vector(m_b, "m_b");
  check_vector(g_t, "g_t");
  for (std::size_t k = 0; k < slots; ++k) {
    if (m_b[k] > m_s[k])
      throw ConfigError(concat("m_b > m_s at slot ", k, " (", m_b[k], " > ", m_s[k], ")"));
    for (std::size_t i = 0; i < n; ++i) {
      if (rp[k][i] < 0.0)
        throw ConfigError(concat("negative rp at slot ", k, ", nanogrid ", i));
      if (d[k][i] < 0.0)
        throw ConfigError(concat("negative d at slot ", k, ", nanogrid ", i));
    }
  }
}

double Scenario::t_out_min(std::size_t i) const { return column_min(t_out, i); }
double Scenario::t_out_max(std::size_t i) const { return column_max(t_out, i); }
double Scenario::t_opt_min(std::size_t i) const { return column_min(t_opt, i); }
double Scenario::t_opt_max(std::size_t i) const { return column_max(t_opt, i); }
double Scenario::m_s_max() const { return *std::max_element(m_s.begin(), m_s.end()); }
double Scenario::m_b_min() const { return *std::min_element(m_b.begin(), m_b.end()); }

void check_assumptions(const NanogridParams& params, const Scenario& scenario,
                       std::size_t i) {
  const double lo = scenario.t_out_min(i);
  const double hi = scenario.t_out_max(i);
  if (!(hi <= params.t_max))
    throw ConfigError(concat("assumption (a) violated for nanogrid ", i, ": max outdoor ",
                             hi, " exceeds t_max ", params.t_max));
  if (!(params.eta * params.e_max + lo >= params.t_min))
    throw ConfigError(concat("assumption (b) violated for nanogrid ", i,
                             ": eta*e_max + min outdoor is below t_min"));
  const double phi = (1.0 - params.epsilon) * (hi + params.eta * params.e_max - lo);
  if (!(params.t_max - params.t_min > phi))
    throw ConfigError(concat("assumption (c) violated for nanogrid ", i,
                             ": comfort band ", params.t_max - params.t_min,
                             " does not exceed phi ", phi));
}

double thermal_step(double t, double t_out, double e, double epsilon, double eta,
                    HvacMode mode) {
  const double heat = mode == HvacMode::heating ? eta * e : -eta * e;
  return epsilon * t + (1.0 - epsilon) * (t_out + heat);
}

double thermal_step(double t, double t_out, double e, const NanogridParams& params) {
  return thermal_step(t, t_out, e, params.epsilon, params.eta, params.mode);
}

double bilinear_trade_cost(double tp, double p_s, double p_b) {
  return p_s * std::max(tp, 0.0) + p_b * std::min(tp, 0.0);
}

double battery_cost(double y, double c_b) { return 0.5 * c_b * y * y; }

double grid_residual(const std::vector<double>& tps, double g_t, double y) {
  double sum = 0.0;
  for (double tp : tps) sum += tp;
  return sum - g_t + y;
}

double grid_settlement(double residual, double m_s, double m_b) {
  return m_s * std::max(residual, 0.0) + m_b * std::min(residual, 0.0);
}

double pme_profit(const LeaderAction& action, const std::vector<double>& tps,
                  const PmeSlot& slot, double c_b) {
  double revenue = 0.0;
  for (double tp : tps) revenue += bilinear_trade_cost(tp, action.p_s, action.p_b);
  const double r = grid_residual(tps, slot.g_t, action.y);
  return revenue - battery_cost(action.y, c_b) - grid_settlement(r, slot.m_s, slot.m_b);
}

}  // namespace ems
