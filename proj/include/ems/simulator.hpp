#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ems/domain.hpp"
#include "ems/stackelberg.hpp"

namespace ems {

class InvariantError : public std::runtime_error {
 public:
  InvariantError(const std::string& what, std::size_t slot)
      : std::runtime_error(what), slot_(slot) {}
  std::size_t slot() const { return slot_; }

 private:
  std::size_t slot_;
};

struct SlotOutcome {
  std::size_t slot = 0;
  LeaderAction leader;
  std::vector<FollowerAction> followers;
  SlotState next;
  std::vector<double> trade_cost;
  std::vector<double> discomfort;
  double pme_profit = 0.0;
  double residual = 0.0;
  bool converged = true;
  int iterations = 0;
  IterationTrace trace;  // empty unless the policy recorded one
  double wall_ms = 0.0;  // time spent in the policy
};

struct RunReport {
  double pme_profit = 0.0;
  double energy_cost = 0.0;
  double discomfort_cost = 0.0;
  double aggregate_cost = 0.0;
  double tatd = 0.0;
  double hvac_total = 0.0;
  int comfort_violations = 0;
  int battery_violations = 0;
  int nonconverged_slots = 0;
  SlotState initial;
  std::vector<SlotOutcome> slots;
};

struct RunOptions {
  std::optional<std::vector<double>> t0;  // default: comfort band midpoint
  std::optional<double> e0;               // default: battery band midpoint
  bool throw_on_violation = false;
  // Slack on the comfort and battery bounds for floating-point round-off.
  double bound_tolerance = 1e-9;
};

// What a strategy decided for one slot.
struct SlotDecision {
  LeaderAction leader;
  std::vector<FollowerAction> followers;
  bool converged = true;
  int iterations = 0;
  IterationTrace trace;
};

using SlotPolicy = std::function<SlotDecision(const SlotState&, std::size_t)>;

// Controls at V_i = V_i^max, Gamma_i = Gamma_i^min, V_P = V_P^max,
// theta = theta^min for the scenario's envelope.
SystemSetup make_default_setup(const Scenario& scenario,
                               const std::vector<NanogridParams>& nanogrids,
                               const PmeParams& pme);

// Scenario assumptions and control bounds; throws ConfigError.
void validate_setup(const Scenario& scenario, const SystemSetup& setup);

// Throws ConfigError when a given T0 or E0 lies outside its band.
SlotState initial_state(const Scenario& scenario, const SystemSetup& setup,
                        const RunOptions& options = {});

SlotState update_queues(const SlotState& state, const std::vector<FollowerAction>& followers,
                        const LeaderAction& leader, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup);

RunReport run_policy(const Scenario& scenario, const SystemSetup& setup,
                     const SlotPolicy& policy, const RunOptions& options = {});

RunReport run(const Scenario& scenario, const SystemSetup& setup, const GameConfig& config,
              const RunOptions& options = {});

}  // namespace ems
