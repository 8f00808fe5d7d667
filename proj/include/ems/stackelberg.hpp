#pragma once

#include <optional>
#include <vector>

#include "ems/domain.hpp"
#include "ems/nanogrid.hpp"
#include "ems/pme.hpp"

namespace ems {

// delta^m = 1 / (d0 + d1 * m)
struct StepSchedule {
  double d0 = 1.0;
  double d1 = 0.5;
  double at(int m) const { return 1.0 / (d0 + d1 * m); }
};

struct GameConfig {
  double rho = 1e-3;
  int max_iters = 500;
  StepSchedule step_ps;
  StepSchedule step_pb;
  StepSchedule step_y;
  double min_gap = 0.01;  // enforced p_s - p_b
  // A coordinate's step multiplier is scaled by this factor each time its
  // subgradient changes sign.
  double shrink = 0.5;
  // Finish with exact coordinate-wise minimization of pro' (followers
  // re-solved) from the last iterate.
  bool refine = true;
  bool record_trace = false;
  std::optional<LeaderAction> initial;

  void validate() const;
};

enum class FollowerRule {
  lyapunov,  // drift-plus-penalty best response
  myopic,    // queue term dropped, comfort band enforced per slot
  fixed,     // consumption given in advance (price-inelastic)
};

struct SystemSetup {
  std::vector<NanogridParams> nanogrids;
  std::vector<NanogridControl> nanogrid_controls;
  PmeParams pme;
  PmeControl pme_control;
};

// One slot of the leader/follower game, fully bound.
struct SlotGame {
  std::vector<FollowerProblem> followers;
  FollowerRule rule = FollowerRule::lyapunov;
  std::vector<double> fixed_e;
  PmeSlot pme_slot;
  PmeParams pme;
  PmeControl pme_control;
  double b = 0.0;  // virtual battery queue seen by the leader
  Interval y_box;
};

SlotGame make_slot_game(const SlotState& state, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup);

struct IterationRecord {
  LeaderAction leader;
  std::vector<FollowerAction> followers;
  SubgradientSet subgradient;
  double step_ps = 0.0;
  double step_pb = 0.0;
  double step_y = 0.0;
  double dist_ps = 0.0;
  double dist_pb = 0.0;
  double dist_y = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct SlotSolution {
  LeaderAction leader;
  std::vector<FollowerAction> followers;
  IterationTrace trace;
  bool converged = false;
  int iterations = 0;
};

LeaderAction project_leader(const LeaderAction& raw, double m_s, double m_b,
                            const Interval& y_box, double min_gap);
LeaderAction project_leader(const LeaderAction& raw, double m_s, double m_b,
                            const PmeParams& params, double min_gap);

std::vector<FollowerResponse> respond(const SlotGame& game, const LeaderAction& leader);

// pro' at a leader action with every follower re-solved.
double leader_objective(const SlotGame& game, const LeaderAction& leader);

SlotSolution solve_slot(const SlotGame& game, const GameConfig& config);
SlotSolution solve_slot(const SlotState& state, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup, const GameConfig& config);

}  // namespace ems
