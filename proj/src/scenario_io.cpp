#include "ems/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace ems {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) out += (j ? "," : "") + v[j];
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::string> scenario_headers(std::size_t n) {
  std::vector<std::string> h{"slot", "m_s", "m_b", "g_t"};
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string s = std::to_string(i);
    for (const char* name : {"rp_", "d_", "t_out_", "t_opt_"}) h.push_back(name + s);
  }
  return h;
}

Scenario load_scenario(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("scenario file is empty", line_no, 1);

  const std::vector<std::string> header = split(line);
  std::map<std::string, std::size_t> column;
  std::size_t n = 0;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!column.emplace(header[j], j).second)
      throw ParseError("duplicate column '" + header[j] + "'", line_no, j + 1);
    if (header[j].rfind("rp_", 0) == 0) ++n;
  }
  const std::vector<std::string> expected = scenario_headers(n);
  for (const auto& name : expected)
    if (!column.count(name))
      throw ParseError("missing column '" + name + "'; expected headers: " + join(expected),
                       line_no, 1);
  if (header.size() != expected.size()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      bool known = false;
      for (const auto& name : expected) known = known || name == header[j];
      if (!known)
        throw ParseError("unexpected column '" + header[j] + "'; expected headers: " +
                             join(expected),
                         line_no, j + 1);
    }
  }

  Scenario s;
  s.n = n;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no, std::min(cells.size(), header.size()) + 1);
    auto value = [&](const std::string& name) {
      const std::size_t j = column.at(name);
      const std::string& text = cells[j];
      double v = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError("cannot parse '" + text + "' in column '" + name + "'", line_no, j + 1);
      return v;
    };
    const double slot = value("slot");
    if (slot != static_cast<double>(s.slots))
      throw ParseError("slot index " + cells[column.at("slot")] + " out of sequence, expected " +
                           std::to_string(s.slots),
                       line_no, column.at("slot") + 1);
    s.m_s.push_back(value("m_s"));
    s.m_b.push_back(value("m_b"));
    s.g_t.push_back(value("g_t"));
    std::vector<double> rp(n), d(n), t_out(n), t_opt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string idx = std::to_string(i + 1);
      rp[i] = value("rp_" + idx);
      d[i] = value("d_" + idx);
      t_out[i] = value("t_out_" + idx);
      t_opt[i] = value("t_opt_" + idx);
    }
    s.rp.push_back(rp);
    s.d.push_back(d);
    s.t_out.push_back(t_out);
    s.t_opt.push_back(t_opt);
    ++s.slots;
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return load_scenario(in);
}

void save_scenario(const Scenario& s, std::ostream& out) {
  out << join(scenario_headers(s.n)) << '\n';
  for (std::size_t k = 0; k < s.slots; ++k) {
    out << k << ',' << format_double(s.m_s[k]) << ',' << format_double(s.m_b[k]) << ','
        << format_double(s.g_t[k]);
    for (std::size_t i = 0; i < s.n; ++i)
      out << ',' << format_double(s.rp[k][i]) << ',' << format_double(s.d[k][i]) << ','
          << format_double(s.t_out[k][i]) << ',' << format_double(s.t_opt[k][i]);
    out << '\n';
  }
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file '" + path + "'");
  save_scenario(s, out);
}

void SyntheticSpec::validate() const {
  if (slots == 0) throw ConfigError("synthetic spec needs at least one slot");
  if (!(g_t_lo <= g_t_hi)) throw ConfigError("g_t range is empty");
  if (!(epsilon_lo <= epsilon_hi && epsilon_lo > 0.0 && epsilon_hi < 1.0))
    throw ConfigError("epsilon range must be a nonempty subset of (0, 1)");
  if (!(m_s_base - m_s_noise > m_b))
    throw ConfigError("selling price profile must stay above the buying price");
  const double hi = t_out_mean + t_out_amplitude + t_out_noise + t_out_site_spread;
  const double lo = t_out_mean - t_out_amplitude - t_out_noise - t_out_site_spread;
  const auto& p = reference;
  if (hi > p.t_max)
    throw ConfigError("assumption (a) violated: outdoor profile can reach " +
                      format_double(hi) + " above t_max");
  if (p.eta * p.e_max + lo < p.t_min)
    throw ConfigError("assumption (b) violated: outdoor profile too cold for full heating");
  if (!(p.t_max - p.t_min > (1.0 - epsilon_lo) * (hi + p.eta * p.e_max - lo)))
    throw ConfigError("assumption (c) violated: outdoor swing too wide for the comfort band");
}

SyntheticScenario generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto bell = [](double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-z * z);
  };
  constexpr double pi = std::numbers::pi;

  SyntheticScenario out;
  for (std::size_t i = 0; i < spec.n; ++i)
    out.epsilon.push_back(uniform(spec.epsilon_lo, spec.epsilon_hi));
  std::vector<double> site_offset;
  for (std::size_t i = 0; i < spec.n; ++i)
    site_offset.push_back(uniform(-spec.t_out_site_spread, spec.t_out_site_spread));

  Scenario& s = out.scenario;
  s.n = spec.n;
  s.slots = spec.slots;
  for (std::size_t k = 0; k < spec.slots; ++k) {
    const double h = static_cast<double>(k % 24);
    s.m_b.push_back(spec.m_b);
    s.m_s.push_back(spec.m_s_base + spec.m_s_morning_peak * bell(h, 8.0, 2.0) +
                    spec.m_s_evening_peak * bell(h, 18.5, 2.5) +
                    uniform(-spec.m_s_noise, spec.m_s_noise));
    s.g_t.push_back(uniform(spec.g_t_lo, spec.g_t_hi));
    const double daily = std::sin(2.0 * pi * (h - 9.0) / 24.0);
    const double solar = std::max(0.0, std::sin(pi * (h - 6.0) / 12.0));
    const double target = (h >= 7.0 && h < 22.0) ? spec.t_opt_day : spec.t_opt_night;
    std::vector<double> rp, d, t_out, t_opt;
    for (std::size_t i = 0; i < spec.n; ++i) {
      t_out.push_back(spec.t_out_mean + spec.t_out_amplitude * daily + site_offset[i] +
                      uniform(-spec.t_out_noise, spec.t_out_noise));
      t_opt.push_back(target);
      d.push_back((spec.d_base + spec.d_morning_peak * bell(h, 8.0, 1.5) +
                   spec.d_evening_peak * bell(h, 19.0, 2.0)) *
                  uniform(0.8, 1.2));
      rp.push_back(spec.solar_peak * solar * uniform(0.7, 1.0) + uniform(0.0, spec.wind_max));
    }
    s.rp.push_back(rp);
    s.d.push_back(d);
    s.t_out.push_back(t_out);
    s.t_opt.push_back(t_opt);
  }
  s.validate();
  return out;
}

}  // namespace ems
