#include "ems/report.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace ems {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

Experiment make_experiment(const SyntheticSpec& spec, const NanogridParams& base,
                           const PmeParams& pme) {
  SyntheticSpec s = spec;
  s.reference = base;
  const SyntheticScenario gen = generate_synthetic(s);
  std::vector<NanogridParams> params(gen.scenario.n, base);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].epsilon = gen.epsilon[i];
  return {gen.scenario, make_default_setup(gen.scenario, params, pme)};
}

Experiment make_experiment(const Scenario& scenario, const NanogridParams& base,
                           const PmeParams& pme) {
  std::vector<NanogridParams> params(scenario.n, base);
  return {scenario, make_default_setup(scenario, params, pme)};
}

void write_summary(const RunReport& r, std::ostream& out) {
  out << "pme_profit = " << fixed(r.pme_profit) << '\n'
      << "energy_cost = " << fixed(r.energy_cost) << '\n'
      << "discomfort_cost = " << fixed(r.discomfort_cost) << '\n'
      << "aggregate_cost = " << fixed(r.aggregate_cost) << '\n'
      << "tatd = " << fixed(r.tatd) << '\n'
      << "hvac_total = " << fixed(r.hvac_total) << '\n'
      << "slots = " << r.slots.size() << '\n'
      << "comfort_violations = " << r.comfort_violations << '\n'
      << "battery_violations = " << r.battery_violations << '\n'
      << "nonconverged_slots = " << r.nonconverged_slots << '\n';
}

std::string summary_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["pme_profit"] = r.pme_profit;
  j["energy_cost"] = r.energy_cost;
  j["discomfort_cost"] = r.discomfort_cost;
  j["aggregate_cost"] = r.aggregate_cost;
  j["tatd"] = r.tatd;
  j["hvac_total"] = r.hvac_total;
  j["comfort_violations"] = r.comfort_violations;
  j["battery_violations"] = r.battery_violations;
  j["nonconverged_slots"] = r.nonconverged_slots;
  auto& slots = j["slots"] = nlohmann::ordered_json::array();
  for (const auto& s : r.slots) {
    nlohmann::ordered_json o;
    o["slot"] = s.slot;
    o["p_s"] = s.leader.p_s;
    o["p_b"] = s.leader.p_b;
    o["y"] = s.leader.y;
    o["e_batt"] = s.next.e_batt;
    o["residual"] = s.residual;
    o["pme_profit"] = s.pme_profit;
    o["converged"] = s.converged;
    o["iterations"] = s.iterations;
    auto& ngs = o["nanogrids"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.followers.size(); ++i)
      ngs.push_back({{"e", s.followers[i].e},
                     {"tp", s.followers[i].tp},
                     {"t", s.next.t[i]},
                     {"h", s.next.h[i]},
                     {"trade_cost", s.trade_cost[i]},
                     {"discomfort", s.discomfort[i]}});
    slots.push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

void write_series_csv(const RunReport& r, std::ostream& out) {
  const std::size_t n = r.initial.t.size();
  out << "slot,p_s,p_b,y,e_batt,b,residual,pme_profit,converged,iterations";
  for (std::size_t i = 1; i <= n; ++i)
    out << ",e_" << i << ",tp_" << i << ",t_" << i << ",h_" << i;
  out << '\n';
  for (const auto& s : r.slots) {
    out << s.slot << ',' << fixed(s.leader.p_s) << ',' << fixed(s.leader.p_b) << ','
        << fixed(s.leader.y) << ',' << fixed(s.next.e_batt) << ',' << fixed(s.next.b) << ','
        << fixed(s.residual) << ',' << fixed(s.pme_profit) << ',' << (s.converged ? 1 : 0)
        << ',' << s.iterations;
    for (std::size_t i = 0; i < n; ++i)
      out << ',' << fixed(s.followers[i].e) << ',' << fixed(s.followers[i].tp) << ','
          << fixed(s.next.t[i]) << ',' << fixed(s.next.h[i]);
    out << '\n';
  }
}

void write_trace_csv(const IterationTrace& trace, std::size_t slot, std::ostream& out,
                     bool header) {
  if (header)
    out << "slot,iteration,p_s,p_b,y,g_ps,g_pb,g_y,step_ps,step_pb,step_y,dist_ps,dist_pb,"
           "dist_y\n";
  for (std::size_t m = 0; m < trace.records.size(); ++m) {
    const auto& rec = trace.records[m];
    out << slot << ',' << m << ',' << fixed(rec.leader.p_s, 9) << ',' << fixed(rec.leader.p_b, 9)
        << ',' << fixed(rec.leader.y, 9) << ',' << fixed(rec.subgradient.g_ps, 9) << ','
        << fixed(rec.subgradient.g_pb, 9) << ',' << fixed(rec.subgradient.g_y, 9) << ','
        << fixed(rec.step_ps, 9) << ',' << fixed(rec.step_pb, 9) << ',' << fixed(rec.step_y, 9)
        << ',' << fixed(rec.dist_ps, 9) << ',' << fixed(rec.dist_pb, 9) << ','
        << fixed(rec.dist_y, 9) << '\n';
  }
}

BoundsReport compute_all_bounds(const Experiment& ex) {
  BoundsReport b;
  for (std::size_t i = 0; i < ex.scenario.n; ++i)
    b.followers.push_back(compute_bounds(ex.setup.nanogrids[i], ex.setup.nanogrid_controls[i].v,
                                         follower_envelope(ex.scenario, i)));
  b.leader = compute_bounds(ex.setup.pme, ex.setup.pme_control.v_p, leader_envelope(ex.scenario));
  return b;
}

void write_bounds(const BoundsReport& b, std::ostream& out) {
  for (std::size_t i = 0; i < b.followers.size(); ++i) {
    const auto& f = b.followers[i];
    const std::string p = "nanogrid_" + std::to_string(i + 1) + ".";
    out << p << "v_max = " << fixed(f.v_max, 9) << '\n'
        << p << "gamma_min = " << fixed(f.gamma_min, 9) << '\n'
        << p << "gamma_max = " << fixed(f.gamma_max, 9) << '\n'
        << p << "phi = " << fixed(f.phi, 9) << '\n'
        << p << "lambda = " << fixed(f.lambda, 9) << '\n'
        << p << "omega_max = " << fixed(f.omega_max, 9) << '\n';
  }
  out << "pme.v_p_max = " << fixed(b.leader.v_p_max, 9) << '\n'
      << "pme.theta_min = " << fixed(b.leader.theta_min, 9) << '\n'
      << "pme.theta_max = " << fixed(b.leader.theta_max, 9) << '\n'
      << "pme.c_min = " << fixed(b.leader.c_min, 9) << '\n'
      << "pme.c_max = " << fixed(b.leader.c_max, 9) << '\n'
      << "pme.omega_p_max = " << fixed(b.leader.omega_p_max, 9) << '\n';
}

std::vector<CaseRow> compare_cases(const Experiment& ex, const std::vector<CaseId>& ids,
                                   const GameConfig& config) {
  std::vector<CaseRow> rows;
  for (CaseId id : ids) rows.push_back({id, run_case(id, ex.scenario, ex.setup, config)});
  return rows;
}

void write_comparison_csv(const std::vector<CaseRow>& rows, std::ostream& out) {
  out << "case,name,trading_profit,energy_cost,discomfort_cost,aggregate_cost,tatd\n";
  for (const auto& row : rows) {
    const bool cooperative = row.id == CaseId::SocialWelfare;
    out << case_number(row.id) << ',' << case_name(row.id) << ','
        << (cooperative ? "∖" : fixed(row.report.pme_profit, 3)) << ','
        << (cooperative ? "∖" : fixed(row.report.energy_cost, 3)) << ','
        << fixed(row.report.discomfort_cost, 3) << ',' << fixed(row.report.aggregate_cost, 3)
        << ',' << fixed(row.report.tatd, 4) << '\n';
  }
}

void write_comparison_table(const std::vector<CaseRow>& rows, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-6s %16s %14s %16s %15s %8s\n", "case", "trading_profit",
                "energy_cost", "discomfort_cost", "aggregate_cost", "tatd");
  out << line;
  for (const auto& row : rows) {
    const bool cooperative = row.id == CaseId::SocialWelfare;
    const std::string profit = cooperative ? "∖" : fixed(row.report.pme_profit, 3);
    const std::string energy = cooperative ? "∖" : fixed(row.report.energy_cost, 3);
    // The set-minus sign is three bytes wide in UTF-8 but one column on screen.
    const int pad = cooperative ? 2 : 0;
    std::snprintf(line, sizeof(line), "%-6d %*s %*s %16.3f %15.3f %8.4f\n",
                  case_number(row.id), 16 + pad, profit.c_str(), 14 + pad, energy.c_str(),
                  row.report.discomfort_cost, row.report.aggregate_cost, row.report.tatd);
    out << line;
  }
}

SweepParameter parse_sweep_parameter(const std::string& text) {
  for (SweepParameter p : {SweepParameter::gamma, SweepParameter::epsilon, SweepParameter::t_min,
                           SweepParameter::t_max, SweepParameter::n})
    if (text == sweep_parameter_name(p)) return p;
  throw ConfigError("unknown sweep parameter '" + text + "' (gamma, epsilon, t_min, t_max, n)");
}

std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::gamma: return "gamma";
    case SweepParameter::epsilon: return "epsilon";
    case SweepParameter::t_min: return "t_min";
    case SweepParameter::t_max: return "t_max";
    case SweepParameter::n: return "n";
  }
  return "unknown";
}

std::vector<SweepPoint> sweep(SweepParameter parameter, const std::vector<double>& values,
                              const SyntheticSpec& spec, const NanogridParams& base,
                              const PmeParams& pme, const GameConfig& config,
                              bool with_welfare) {
  std::vector<SweepPoint> points;
  for (double value : values) {
    SweepPoint pt;
    pt.value = value;
    SyntheticSpec s = spec;
    NanogridParams p = base;
    switch (parameter) {
      case SweepParameter::gamma: p.gamma = value; break;
      case SweepParameter::epsilon:
        s.epsilon_lo = value;
        s.epsilon_hi = value;
        break;
      case SweepParameter::t_min: p.t_min = value; break;
      case SweepParameter::t_max: p.t_max = value; break;
      case SweepParameter::n:
        if (value < 1.0 || value != static_cast<double>(static_cast<std::size_t>(value)))
          throw ConfigError("n sweep values must be positive integers");
        s.n = static_cast<std::size_t>(value);
        break;
    }
    try {
      const Experiment ex = make_experiment(s, p, pme);
      const auto start = std::chrono::steady_clock::now();
      pt.proposed = run(ex.scenario, ex.setup, config);
      const auto stop = std::chrono::steady_clock::now();
      pt.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      if (with_welfare)
        pt.welfare = run_case(CaseId::SocialWelfare, ex.scenario, ex.setup, config);
    } catch (const ConfigError& e) {
      pt.skipped = true;
      pt.note = e.what();
    }
    points.push_back(std::move(pt));
  }
  return points;
}

void write_sweep_csv(const std::vector<SweepPoint>& points, SweepParameter parameter,
                     std::ostream& out, bool timing) {
  out << sweep_parameter_name(parameter)
      << ",status,pme_profit,energy_cost,discomfort_cost,aggregate_cost,welfare_aggregate_cost,"
         "tatd,hvac_total,comfort_violations,battery_violations,nonconverged_slots";
  if (timing) out << ",wall_ms";
  out << '\n';
  for (const auto& pt : points) {
    out << fixed(pt.value, 6) << ',';
    if (pt.skipped) {
      // Keep the row rectangular; the note explains the skip.
      std::string note = pt.note;
      for (char& c : note)
        if (c == ',' || c == '\n') c = ';';
      out << "skipped: " << note << ",,,,,,,,,,";
      if (timing) out << ',';
      out << '\n';
      continue;
    }
    const RunReport& r = pt.proposed;
    out << "ok," << fixed(r.pme_profit) << ',' << fixed(r.energy_cost) << ','
        << fixed(r.discomfort_cost) << ',' << fixed(r.aggregate_cost) << ','
        << (pt.welfare ? fixed(pt.welfare->aggregate_cost) : std::string()) << ','
        << fixed(r.tatd) << ',' << fixed(r.hvac_total) << ',' << r.comfort_violations << ','
        << r.battery_violations << ',' << r.nonconverged_slots;
    if (timing) out << ',' << fixed(pt.wall_ms, 3);
    out << '\n';
  }
}

}  // namespace ems
