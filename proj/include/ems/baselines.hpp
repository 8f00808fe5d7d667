#pragma once

#include <string>
#include <vector>

#include "ems/simulator.hpp"

namespace ems {

enum class CaseId {
  FixedPointForecastPrice,  // case 1
  FixedPointRealTimePrice,  // case 2
  MyopicGame,               // case 3
  Proposed,                 // case 4
  SocialWelfare,            // case 5
};

const std::vector<CaseId>& all_cases();
int case_number(CaseId id);
std::string case_name(CaseId id);
CaseId parse_case(const std::string& text);

// Consumption that lands the indoor temperature on t_opt, clamped to the
// injection box.
double fixed_point_consumption(const FollowerProblem& problem);

// Cooperative slot cost: battery wear, grid settlement and discomfort, with
// internal PME/nanogrid payments netted out.
double social_welfare_cost(const std::vector<double>& e, double y, const SlotState& state,
                           const Scenario& scenario, std::size_t k, const SystemSetup& setup);

struct WelfareSolution {
  std::vector<double> e;
  double y = 0.0;
  double shadow_price = 0.0;
};

// Per-slot minimizer of the cooperative drift-plus-penalty: each agent's
// drift term divided by its V plus the cooperative slot cost.
WelfareSolution solve_welfare_slot(const SlotState& state, const Scenario& scenario,
                                   std::size_t k, const SystemSetup& setup);
double welfare_objective(const std::vector<double>& e, double y, const SlotState& state,
                         const Scenario& scenario, std::size_t k, const SystemSetup& setup);

RunReport run_case(CaseId id, const Scenario& scenario, const SystemSetup& setup,
                   const GameConfig& config, const RunOptions& options = {});

}  // namespace ems
