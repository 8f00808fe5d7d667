#include "ems/stackelberg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ems {

void GameConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  for (const StepSchedule* s : {&step_ps, &step_pb, &step_y})
    if (!(s->d0 > 0.0 && s->d1 > 0.0)) throw ConfigError("step constants must be positive");
  if (!(min_gap > 0.0)) throw ConfigError("min_gap must be positive");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw ConfigError("shrink must lie in (0, 1]");
}

SlotGame make_slot_game(const SlotState& state, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup) {
  SlotGame game;
  game.pme_slot = scenario.pme_slot(k);
  game.pme = setup.pme;
  game.pme_control = setup.pme_control;
  game.b = state.b;
  game.y_box = charge_box(setup.pme);
  game.followers.reserve(scenario.n);
  for (std::size_t i = 0; i < scenario.n; ++i) {
    FollowerProblem fp;
    fp.t = state.t[i];
    fp.h = state.h[i];
    fp.slot = scenario.nanogrid_slot(k, i);
    fp.params = setup.nanogrids[i];
    fp.control = setup.nanogrid_controls[i];
    fp.p_b_min = game.pme_slot.m_b;
    fp.p_s_max = game.pme_slot.m_s;
    game.followers.push_back(fp);
  }
  return game;
}

LeaderAction project_leader(const LeaderAction& raw, double m_s, double m_b,
                            const Interval& y_box, double min_gap) {
  if (m_s - m_b < min_gap)
    throw ConfigError("price band m_s - m_b is narrower than the minimum gap");
  LeaderAction out;
  out.p_b = std::clamp(raw.p_b, m_b, m_s - min_gap);
  out.p_s = std::clamp(raw.p_s, out.p_b + min_gap, m_s);
  out.y = y_box.clamp(raw.y);
  return out;
}

LeaderAction project_leader(const LeaderAction& raw, double m_s, double m_b,
                            const PmeParams& params, double min_gap) {
  return project_leader(raw, m_s, m_b, charge_box(params), min_gap);
}

std::vector<FollowerResponse> respond(const SlotGame& game, const LeaderAction& leader) {
  std::vector<FollowerResponse> out(game.followers.size());
  for (std::size_t i = 0; i < game.followers.size(); ++i) {
    const FollowerProblem& fp = game.followers[i];
    switch (game.rule) {
      case FollowerRule::lyapunov:
        out[i] = best_response_detail(fp, leader);
        break;
      case FollowerRule::myopic: {
        FollowerProblem myopic = fp;
        myopic.h = 0.0;
        myopic.comfort_box = true;
        out[i] = best_response_detail(myopic, leader);
        break;
      }
      case FollowerRule::fixed:
        out[i].action.e = game.fixed_e.at(i);
        out[i].action.tp = fp.slot.d + out[i].action.e - fp.slot.rp;
        out[i].branch = ResponseBranch::kink;
        break;
    }
  }
  return out;
}

namespace {

std::vector<double> injections(const std::vector<FollowerResponse>& rs) {
  std::vector<double> tps(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) tps[i] = rs[i].action.tp;
  return tps;
}

struct Probe {
  double f = 0.0;
  double residual = 0.0;
};

Probe probe(const SlotGame& game, const LeaderAction& a) {
  const auto tps = injections(respond(game, a));
  return {p4_objective(a, tps, game.b, game.pme_slot, game.pme_control, game.pme),
          grid_residual(tps, game.pme_slot.g_t, a.y)};
}

// Global minimizer of pro' along one price axis. Between follower regime
// changes and residual sign changes pro' is quadratic in the price, so a
// three-point fit per piece is exact.
double minimize_price(const SlotGame& game, const LeaderAction& x, bool selling, double lo,
                      double hi) {
  auto at = [&](double p) {
    LeaderAction a = x;
    (selling ? a.p_s : a.p_b) = p;
    return a;
  };
  if (!(hi > lo)) return lo;
  std::vector<double> pts{lo, hi};
  if (game.rule != FollowerRule::fixed) {
    for (const FollowerProblem& fp : game.followers) {
      FollowerProblem q = fp;
      if (game.rule == FollowerRule::myopic) {
        q.h = 0.0;
        q.comfort_box = true;
      }
      for (double p : price_breakpoints(q))
        if (p > lo && p < hi) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  double best = selling ? x.p_s : x.p_b;
  double best_f = probe(game, at(best)).f;
  auto consider = [&](double p, double f) {
    if (f < best_f) {
      best_f = f;
      best = p;
    }
  };
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const double a = pts[j];
    const double b = pts[j + 1];
    const Probe pa = probe(game, at(a));
    const Probe pb = probe(game, at(b));
    consider(a, pa.f);
    consider(b, pb.f);
    std::array<double, 3> cuts{a, b, b};
    std::size_t ncut = 2;
    if ((pa.residual > 0.0 && pb.residual < 0.0) || (pa.residual < 0.0 && pb.residual > 0.0)) {
      const double root = a + (b - a) * pa.residual / (pa.residual - pb.residual);
      if (root > a && root < b) {
        cuts = {a, root, b};
        ncut = 3;
        consider(root, probe(game, at(root)).f);
      }
    }
    for (std::size_t c = 0; c + 1 < ncut; ++c) {
      const double u = cuts[c];
      const double v = cuts[c + 1];
      const double w = 0.5 * (u + v);
      const double fu = probe(game, at(u)).f;
      const double fw = probe(game, at(w)).f;
      const double fv = probe(game, at(v)).f;
      consider(w, fw);
      const double curv = fu - 2.0 * fw + fv;
      if (curv > 0.0) {
        const double vertex = w - 0.25 * (v - u) * (fv - fu) / curv;
        if (vertex > u && vertex < v) consider(vertex, probe(game, at(vertex)).f);
      }
    }
  }
  return best;
}

LeaderAction refine(const SlotGame& game, const GameConfig& config, LeaderAction x) {
  const double m_s = game.pme_slot.m_s;
  const double m_b = game.pme_slot.m_b;
  double fx = probe(game, x).f;
  auto try_move = [&](const LeaderAction& cand) {
    const double fc = probe(game, cand).f;
    if (fc < fx) {
      fx = fc;
      x = cand;
    }
  };
  for (int cycle = 0; cycle < 100; ++cycle) {
    const LeaderAction before = x;
    LeaderAction cand = x;
    cand.p_s = minimize_price(game, x, true, x.p_b + config.min_gap, m_s);
    try_move(cand);
    cand = x;
    cand.p_b = minimize_price(game, x, false, m_b, x.p_s - config.min_gap);
    try_move(cand);
    cand = x;
    double sum = 0.0;
    for (double tp : injections(respond(game, x))) sum += tp;
    cand.y = optimal_charge_exact(game.b, sum, game.pme_slot, game.pme_control, game.pme,
                                  game.y_box);
    try_move(cand);
    if (before.p_s == x.p_s && before.p_b == x.p_b && before.y == x.y) break;
  }
  return x;
}

}  // namespace

double leader_objective(const SlotGame& game, const LeaderAction& leader) {
  return probe(game, leader).f;
}

SlotSolution solve_slot(const SlotGame& game, const GameConfig& config) {
  config.validate();
  const double m_s = game.pme_slot.m_s;
  const double m_b = game.pme_slot.m_b;
  const std::size_t n = game.followers.size();

  LeaderAction start;
  if (config.initial) {
    start = *config.initial;
  } else {
    const double mid = 0.5 * (m_s + m_b);
    start = {mid + 0.5 * config.min_gap, mid - 0.5 * config.min_gap, 0.0};
  }
  LeaderAction x = project_leader(start, m_s, m_b, game.y_box, config.min_gap);

  // Step lengths are normalized per coordinate: the harmonic schedule is
  // multiplied by half the coordinate range over the largest subgradient
  // magnitude seen so far.
  const std::array<double, 3> width{0.5 * (m_s - m_b), 0.5 * (m_s - m_b),
                                    0.5 * (game.y_box.hi - game.y_box.lo)};
  const std::array<const StepSchedule*, 3> sched{&config.step_ps, &config.step_pb,
                                                 &config.step_y};
  std::array<double, 3> mult{1.0, 1.0, 1.0};
  std::array<double, 3> gmax{0.0, 0.0, 0.0};
  std::array<double, 3> prev_g{0.0, 0.0, 0.0};

  SlotSolution sol;
  std::vector<double> sens_ps(n), sens_pb(n);
  for (int m = 0; m < config.max_iters; ++m) {
    const auto rs = respond(game, x);
    const auto tps = injections(rs);
    for (std::size_t i = 0; i < n; ++i) {
      sens_ps[i] = rs[i].branch == ResponseBranch::buy_interior ? rs[i].hbar : 0.0;
      sens_pb[i] = rs[i].branch == ResponseBranch::sell_interior ? rs[i].hbar : 0.0;
    }
    const SubgradientSet g = subgradients(x, tps, sens_ps, sens_pb, game.b, game.pme_slot,
                                          game.pme_control, game.pme);
    const std::array<double, 3> gv{g.g_ps, g.g_pb, g.g_y};
    std::array<double, 3> step{};
    for (int c = 0; c < 3; ++c) {
      gmax[c] = std::max(gmax[c], std::abs(gv[c]));
      if (prev_g[c] * gv[c] < 0.0) mult[c] *= config.shrink;
      step[c] = gmax[c] > 0.0 ? mult[c] * width[c] * sched[c]->at(m) / gmax[c] : 0.0;
    }
    prev_g = gv;
    const LeaderAction raw{x.p_s - step[0] * gv[0], x.p_b - step[1] * gv[1],
                           x.y - step[2] * gv[2]};
    const LeaderAction next = project_leader(raw, m_s, m_b, game.y_box, config.min_gap);
    const std::array<double, 3> dist{std::abs(next.p_s - x.p_s), std::abs(next.p_b - x.p_b),
                                     std::abs(next.y - x.y)};
    if (config.record_trace) {
      IterationRecord rec;
      rec.leader = x;
      rec.followers.reserve(n);
      for (const auto& r : rs) rec.followers.push_back(r.action);
      rec.subgradient = g;
      rec.step_ps = step[0];
      rec.step_pb = step[1];
      rec.step_y = step[2];
      rec.dist_ps = dist[0];
      rec.dist_pb = dist[1];
      rec.dist_y = dist[2];
      sol.trace.records.push_back(std::move(rec));
    }
    x = next;
    sol.iterations = m + 1;
    if (dist[0] < config.rho && dist[1] < config.rho && dist[2] < config.rho) {
      sol.converged = true;
      break;
    }
  }

  if (config.refine) x = refine(game, config, x);
  sol.leader = x;
  for (const auto& r : respond(game, x)) sol.followers.push_back(r.action);
  return sol;
}

SlotSolution solve_slot(const SlotState& state, const Scenario& scenario, std::size_t k,
                        const SystemSetup& setup, const GameConfig& config) {
  return solve_slot(make_slot_game(state, scenario, k, setup), config);
}

}  // namespace ems
