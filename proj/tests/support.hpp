#pragma once

// Independent oracles and random instance generators shared by the unit and
// acceptance suites. Nothing here calls into the code under test except to
// build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>

#include "ems/nanogrid.hpp"
#include "ems/pme.hpp"
#include "ems/stackelberg.hpp"
#include "ems/report.hpp"

namespace ems::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
  }

 private:
  std::mt19937_64 gen_;
};

// Default desk scenario: five nanogrids over three days, seed 1.
inline SyntheticSpec desk_spec(std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.seed = seed;
  s.n = 5;
  s.slots = 72;
  return s;
}

inline Experiment desk_experiment(std::uint64_t seed = 1) {
  return make_experiment(desk_spec(seed), NanogridParams{}, PmeParams{});
}

// Drift-plus-penalty objective of one nanogrid written directly from the
// drift bound: epsilon(1-epsilon) H (Gamma + T_out + eta e) plus V times the
// bilinear trade cost and the discomfort of the next temperature. Constant
// terms are kept, so only differences in e are comparable with UN'.
inline double drift_bound_objective(double e, const FollowerProblem& pb, double gamma_shift,
                                    double p_s, double p_b) {
  const double eps = pb.params.epsilon;
  const double eta = pb.params.eta;
  const double t_next = eps * pb.t + (1.0 - eps) * (pb.slot.t_out + eta * e);
  const double tp = pb.slot.d + e - pb.slot.rp;
  const double trade = tp > 0.0 ? p_s * tp : p_b * tp;
  const double dev = t_next - pb.slot.t_opt;
  return eps * (1.0 - eps) * pb.h * (gamma_shift + pb.slot.t_out + eta * e) +
         pb.control.v * (trade + pb.params.gamma * dev * dev);
}

struct GridMin {
  double x = 0.0;
  double f = std::numeric_limits<double>::infinity();
};

// Evenly spaced grid search with `points` samples including both ends.
inline GridMin grid_minimum(const std::function<double(double)>& f, double lo, double hi,
                            int points) {
  GridMin best;
  for (int j = 0; j < points; ++j) {
    const double x = j == points - 1 ? hi : lo + (hi - lo) * j / (points - 1);
    const double v = f(x);
    if (v < best.f) best = {x, v};
  }
  return best;
}

// Random heating nanogrid facing random prices, with a state inside the
// comfort band. The injection limit is wide unless `tight_l` is set.
struct FollowerDraw {
  FollowerProblem problem;
  LeaderAction leader;
};

inline FollowerDraw random_follower(Rng& rng, bool tight_l = false) {
  FollowerDraw d;
  FollowerProblem& pb = d.problem;
  NanogridParams& p = pb.params;
  p.epsilon = rng.uniform(0.85, 0.99);
  p.eta = rng.uniform(5.0, 20.0);
  p.e_max = rng.uniform(1.0, 6.0);
  p.t_min = rng.uniform(60.0, 68.0);
  p.t_max = p.t_min + rng.uniform(6.0, 14.0);
  p.gamma = rng.coin(0.1) ? 0.0 : rng.uniform(0.001, 0.1);
  pb.slot.rp = rng.uniform(0.0, 4.0);
  pb.slot.d = rng.uniform(0.0, 4.0);
  p.l_max = tight_l ? rng.uniform(std::abs(pb.slot.d - pb.slot.rp) + 0.1, 8.0)
                    : rng.uniform(10.0, 30.0);
  pb.slot.t_out = rng.uniform(25.0, 70.0);
  pb.slot.t_opt = rng.uniform(p.t_min, p.t_max);
  pb.t = rng.uniform(p.t_min, p.t_max);
  pb.control.v = rng.uniform(0.02, 3.0);
  pb.control.gamma_shift = rng.uniform(-110.0, -40.0);
  pb.h = pb.t + pb.control.gamma_shift;
  pb.p_b_min = rng.uniform(1.0, 4.0);
  pb.p_s_max = pb.p_b_min + rng.uniform(0.5, 12.0);
  d.leader.p_b = rng.uniform(pb.p_b_min, pb.p_s_max - 0.01);
  d.leader.p_s = rng.uniform(d.leader.p_b + 0.01, pb.p_s_max);
  return d;
}

// Random admissible state for the experiment: temperatures and battery
// energy inside their bands, queues consistent with the controls.
inline SlotState random_state(Rng& rng, const Experiment& ex) {
  SlotState st;
  for (std::size_t i = 0; i < ex.scenario.n; ++i) {
    const auto& p = ex.setup.nanogrids[i];
    st.t.push_back(rng.uniform(p.t_min, p.t_max));
    st.h.push_back(st.t.back() + ex.setup.nanogrid_controls[i].gamma_shift);
  }
  st.e_batt = rng.uniform(ex.setup.pme.e_min, ex.setup.pme.e_max_cap);
  st.b = st.e_batt + ex.setup.pme_control.theta;
  return st;
}

inline LeaderAction random_leader(Rng& rng, const SlotGame& game, double margin) {
  const double m_s = game.pme_slot.m_s;
  const double m_b = game.pme_slot.m_b;
  LeaderAction a;
  a.p_b = rng.uniform(m_b + margin, m_s - 3 * margin);
  a.p_s = rng.uniform(a.p_b + margin, m_s - margin);
  a.y = rng.uniform(game.y_box.lo + margin, game.y_box.hi - margin);
  return a;
}

// Subgradient of pro' at a leader action, built from the followers'
// current branches the same way the solver does.
inline SubgradientSet game_subgradient(const SlotGame& game, const LeaderAction& x) {
  const auto rs = respond(game, x);
  std::vector<double> tps, sens_ps, sens_pb;
  for (const auto& r : rs) {
    tps.push_back(r.action.tp);
    sens_ps.push_back(r.branch == ResponseBranch::buy_interior ? r.hbar : 0.0);
    sens_pb.push_back(r.branch == ResponseBranch::sell_interior ? r.hbar : 0.0);
  }
  return subgradients(x, tps, sens_ps, sens_pb, game.b, game.pme_slot, game.pme_control,
                      game.pme);
}

// True when nothing non-smooth happens within +-h of x along any
// coordinate: same follower branches, same trade signs, same residual sign.
inline bool smooth_around(const SlotGame& game, const LeaderAction& x, double h) {
  const auto base = respond(game, x);
  auto signature = [&](const LeaderAction& a, std::vector<int>& sig) {
    const auto rs = respond(game, a);
    double sum = 0.0;
    for (const auto& r : rs) {
      sig.push_back(static_cast<int>(r.branch));
      sig.push_back(r.action.tp > 0.0 ? 1 : (r.action.tp < 0.0 ? -1 : 0));
      sum += r.action.tp;
    }
    const double res = sum - game.pme_slot.g_t + a.y;
    sig.push_back(res > 0.0 ? 1 : (res < 0.0 ? -1 : 0));
  };
  std::vector<int> ref;
  signature(x, ref);
  for (int c = 0; c < 3; ++c)
    for (double s : {-h, h}) {
      LeaderAction a = x;
      (c == 0 ? a.p_s : (c == 1 ? a.p_b : a.y)) += s;
      std::vector<int> sig;
      signature(a, sig);
      if (sig != ref) return false;
    }
  for (std::size_t i = 0; i < base.size(); ++i)
    if (base[i].action.tp == 0.0) return false;
  return true;
}

}  // namespace ems::test
