#pragma once

#include <vector>

#include "ems/domain.hpp"

namespace ems {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return lo > hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

// Everything a single nanogrid needs to answer a posted leader action.
struct FollowerProblem {
  double t = 0.0;  // indoor temperature at the start of the slot
  double h = 0.0;  // virtual queue H = t + gamma_shift
  NanogridSlot slot;
  NanogridParams params;
  NanogridControl control;
  // Price band used by the threshold shortcuts (minimum buying, maximum
  // selling price the leader may post).
  double p_b_min = 0.0;
  double p_s_max = 0.0;
  // Intersect the injection box with t_min <= T' <= t_max. Used by the
  // myopic baseline, which has no queue to enforce comfort.
  bool comfort_box = false;
};

struct FollowerThresholds {
  double alpha = 0.0;
  double beta = 0.0;
  double vartheta = 0.0;
  double delta = 0.0;
  double hbar = 0.0;
};

// Where the best response landed. Interior branches are the only ones in
// which e* moves with a price.
enum class ResponseBranch { lower_bound, upper_bound, kink, sell_interior, buy_interior };

struct FollowerResponse {
  FollowerAction action;
  ResponseBranch branch = ResponseBranch::lower_bound;
  double hbar = 0.0;
};

struct FollowerEnvelope {
  double t_out_min = 0.0;
  double t_out_max = 0.0;
  double t_opt_min = 0.0;
  double t_opt_max = 0.0;
  double p_s_max = 0.0;
  double p_b_min = 0.0;
};

struct FollowerBounds {
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double v_max = 0.0;
  double lambda = 0.0;
  double phi = 0.0;
  double omega_max = 0.0;  // evaluated at gamma_min
};

FollowerEnvelope follower_envelope(const Scenario& scenario, std::size_t i);

// Feasible consumption range: the injection limit box, optionally
// intersected with the comfort band.
Interval feasible_box(const FollowerProblem& problem);

double p3_objective(double e, const FollowerProblem& problem, const LeaderAction& leader);

FollowerThresholds compute_thresholds(const FollowerProblem& problem);

FollowerResponse best_response_detail(const FollowerProblem& problem,
                                      const LeaderAction& leader);
FollowerAction best_response(const FollowerProblem& problem, const LeaderAction& leader);

// Prices at which e* changes regime along either price axis.
std::vector<double> price_breakpoints(const FollowerProblem& problem);

FollowerBounds compute_bounds(const NanogridParams& params, double v,
                              const FollowerEnvelope& envelope);
// Same, with v taken at the computed V_i^max.
FollowerBounds compute_bounds(const NanogridParams& params, const FollowerEnvelope& envelope);

void validate_control(const NanogridControl& control, const FollowerBounds& bounds);

}  // namespace ems
