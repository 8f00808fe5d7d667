#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ems/baselines.hpp"
#include "ems/scenario_io.hpp"
#include "ems/simulator.hpp"

namespace ems {

// A scenario with its bound parameters and default controls.
struct Experiment {
  Scenario scenario;
  SystemSetup setup;
};

// Synthetic scenario with per-nanogrid epsilon drawn by the generator and
// every other nanogrid constant taken from `base`.
Experiment make_experiment(const SyntheticSpec& spec, const NanogridParams& base,
                           const PmeParams& pme);
// File scenario with identical nanogrids.
Experiment make_experiment(const Scenario& scenario, const NanogridParams& base,
                           const PmeParams& pme);

void write_summary(const RunReport& report, std::ostream& out);
std::string summary_json(const RunReport& report);
void write_series_csv(const RunReport& report, std::ostream& out);
void write_trace_csv(const IterationTrace& trace, std::size_t slot, std::ostream& out,
                     bool header);

struct BoundsReport {
  std::vector<FollowerBounds> followers;
  LeaderBounds leader;
};
BoundsReport compute_all_bounds(const Experiment& experiment);
void write_bounds(const BoundsReport& bounds, std::ostream& out);

struct CaseRow {
  CaseId id;
  RunReport report;
};
std::vector<CaseRow> compare_cases(const Experiment& experiment, const std::vector<CaseId>& ids,
                                   const GameConfig& config);
void write_comparison_csv(const std::vector<CaseRow>& rows, std::ostream& out);
void write_comparison_table(const std::vector<CaseRow>& rows, std::ostream& out);

enum class SweepParameter { gamma, epsilon, t_min, t_max, n };
SweepParameter parse_sweep_parameter(const std::string& text);
std::string sweep_parameter_name(SweepParameter p);

struct SweepPoint {
  double value = 0.0;
  bool skipped = false;
  std::string note;
  RunReport proposed;
  std::optional<RunReport> welfare;
  double wall_ms = 0.0;
};

std::vector<SweepPoint> sweep(SweepParameter parameter, const std::vector<double>& values,
                              const SyntheticSpec& spec, const NanogridParams& base,
                              const PmeParams& pme, const GameConfig& config,
                              bool with_welfare);
void write_sweep_csv(const std::vector<SweepPoint>& points, SweepParameter parameter,
                     std::ostream& out, bool timing);

}  // namespace ems
