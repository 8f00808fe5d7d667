#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ems/domain.hpp"

namespace ems {

// Raised for malformed scenario files; carries the 1-based line and column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Column headers for n nanogrids: slot, m_s, m_b, g_t, then rp_i, d_i,
// t_out_i, t_opt_i for i = 1..n.
std::vector<std::string> scenario_headers(std::size_t n);

Scenario load_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, std::ostream& out);
void save_scenario(const Scenario& scenario, const std::string& path);

struct SyntheticSpec {
  std::size_t n = 5;
  std::size_t slots = 24;
  std::uint64_t seed = 1;
  double g_t_lo = -15.0;
  double g_t_hi = 25.0;
  double epsilon_lo = 0.93;
  double epsilon_hi = 0.98;
  double m_b = 3.0;
  // Selling price: base plus a morning and an evening peak (cent/kWh).
  double m_s_base = 6.0;
  double m_s_morning_peak = 4.0;
  double m_s_evening_peak = 7.0;
  double m_s_noise = 0.5;
  // Outdoor temperature: daily sinusoid plus uniform noise (degF).
  double t_out_mean = 45.0;
  double t_out_amplitude = 8.0;
  double t_out_noise = 1.5;
  double t_out_site_spread = 1.0;
  // Comfort target: night and day levels (degF), day is [7, 22).
  double t_opt_night = 70.0;
  double t_opt_day = 72.0;
  // Base load: floor plus morning and evening peaks (kWh).
  double d_base = 0.8;
  double d_morning_peak = 1.0;
  double d_evening_peak = 1.5;
  // Renewables: midday solar bell plus a uniform wind share (kWh).
  double solar_peak = 3.0;
  double wind_max = 0.8;
  // Envelope the generated scenario must respect.
  NanogridParams reference;

  void validate() const;
};

struct SyntheticScenario {
  Scenario scenario;
  std::vector<double> epsilon;  // per nanogrid
};

SyntheticScenario generate_synthetic(const SyntheticSpec& spec);

}  // namespace ems
