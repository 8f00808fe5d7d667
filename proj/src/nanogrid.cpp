#include "ems/nanogrid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace ems {

namespace {

double linear_coefficient(const FollowerProblem& pb) {
  const auto& p = pb.params;
  const double s = p.signed_eta();
  const double eps = p.epsilon;
  const double drift = eps * (1.0 - eps) * pb.h;
  const double comfort = 2.0 * pb.control.v * p.gamma * (1.0 - eps) *
                         ((1.0 - eps) * pb.slot.t_out + eps * pb.t - pb.slot.t_opt);
  return (drift + comfort) * s;
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

FollowerEnvelope follower_envelope(const Scenario& scenario, std::size_t i) {
  return {scenario.t_out_min(i), scenario.t_out_max(i), scenario.t_opt_min(i),
          scenario.t_opt_max(i), scenario.m_s_max(),    scenario.m_b_min()};
}

Interval feasible_box(const FollowerProblem& pb) {
  const auto& p = pb.params;
  const double net = pb.slot.rp - pb.slot.d;
  Interval box{std::max(-p.l_max + net, 0.0), std::min(p.l_max + net, p.e_max)};
  if (pb.comfort_box) {
    // T' is affine in e with slope (1-eps)*signed_eta.
    const double base = thermal_step(pb.t, pb.slot.t_out, 0.0, p);
    const double slope = (1.0 - p.epsilon) * p.signed_eta();
    double a = (p.t_min - base) / slope;
    double b = (p.t_max - base) / slope;
    if (a > b) std::swap(a, b);
    const Interval eq24 = box;
    box.lo = std::max(box.lo, a);
    box.hi = std::min(box.hi, b);
    // A comfort band out of reach still leaves the injection box usable; the
    // follower then goes as close to the band as it can.
    if (box.empty()) {
      const double target = base < p.t_min ? (p.t_min - base) / slope : (p.t_max - base) / slope;
      const double e = eq24.clamp(target);
      box = {e, e};
    }
  }
  return box;
}

double p3_objective(double e, const FollowerProblem& pb, const LeaderAction& leader) {
  const Interval box = feasible_box(pb);
  if (box.empty())
    throw DomainError("empty feasibility box: l_max too small for d - rp (lower " +
                      describe(box.lo) + " > upper " + describe(box.hi) + ")");
  const double tol = 1e-12 * (1.0 + std::abs(e));
  if (e < box.lo - tol)
    throw DomainError("e = " + describe(e) + " below the lower bound " + describe(box.lo));
  if (e > box.hi + tol)
    throw DomainError("e = " + describe(e) + " above the upper bound " + describe(box.hi));
  const auto& p = pb.params;
  const double v = pb.control.v;
  const double se = p.signed_eta() * e;
  const double om = 1.0 - p.epsilon;
  const double tp = pb.slot.d - pb.slot.rp + e;
  const double quad = v * p.gamma * om * om * se * se;
  const double lin = linear_coefficient(pb) * e;
  const double trade = v * (0.5 * (leader.p_s - leader.p_b) * std::abs(tp) +
                            0.5 * (leader.p_s + leader.p_b) * tp);
  return quad + lin + trade;
}

FollowerThresholds compute_thresholds(const FollowerProblem& pb) {
  const auto& p = pb.params;
  const double v = pb.control.v;
  const double s = p.signed_eta();
  const double eps = p.epsilon;
  const double om = 1.0 - eps;
  FollowerThresholds th;
  th.alpha = 2.0 * v * p.gamma * om * om * s *
             (pb.slot.t_out + (eps * pb.t - pb.slot.t_opt) / om);
  th.beta = th.alpha + 2.0 * v * p.gamma * om * om * s * s * p.e_max;
  if (p.gamma > 0.0) {
    th.hbar = 1.0 / (2.0 * p.gamma * om * om * s * s);
    th.vartheta = (pb.slot.t_opt - eps * pb.t - om * pb.slot.t_out) / (om * s) -
                  eps * pb.h / (2.0 * v * p.gamma * om * s);
  } else {
    th.hbar = std::numeric_limits<double>::infinity();
    th.vartheta = std::numeric_limits<double>::quiet_NaN();
  }
  th.delta = 2.0 * p.gamma * om * s * (pb.slot.t_opt - eps * pb.t - om * pb.slot.t_out) -
             eps * om * pb.h * s / v -
             2.0 * p.gamma * om * om * s * s * (pb.slot.rp - pb.slot.d);
  return th;
}

FollowerResponse best_response_detail(const FollowerProblem& pb, const LeaderAction& leader) {
  const Interval box = feasible_box(pb);
  if (box.empty())
    throw DomainError("empty feasibility box: l_max too small for d - rp (lower " +
                      describe(box.lo) + " > upper " + describe(box.hi) + ")");
  const auto& p = pb.params;
  const FollowerThresholds th = compute_thresholds(pb);
  const double v = pb.control.v;
  const double kink = pb.slot.rp - pb.slot.d;
  const double drift = -p.epsilon * (1.0 - p.epsilon) * pb.h * p.signed_eta();

  double candidate = box.lo;
  if (v * pb.p_b_min > drift - th.alpha) {
    candidate = 0.0;
  } else if (v * pb.p_s_max < drift - th.beta) {
    candidate = p.e_max;
  } else if (p.gamma > 0.0) {
    if (th.delta > leader.p_s)
      candidate = th.vartheta - leader.p_s * th.hbar;
    else if (th.delta < leader.p_b)
      candidate = th.vartheta - leader.p_b * th.hbar;
    else
      candidate = kink;
  }

  // The interior stationary points stay in the candidate set so that prices
  // outside [p_b_min, p_s_max] still get an exact answer.
  std::array<double, 6> options{box.clamp(candidate), box.lo, box.hi, box.clamp(kink), box.lo,
                                box.lo};
  std::size_t count = 4;
  if (p.gamma > 0.0) {
    options[count++] = box.clamp(th.vartheta - leader.p_s * th.hbar);
    options[count++] = box.clamp(th.vartheta - leader.p_b * th.hbar);
  }
  double best_e = options[0];
  double best_obj = p3_objective(best_e, pb, leader);
  for (std::size_t j = 1; j < count; ++j) {
    const double obj = p3_objective(options[j], pb, leader);
    if (obj < best_obj || (obj == best_obj && options[j] < best_e)) {
      best_obj = obj;
      best_e = options[j];
    }
  }

  FollowerResponse out;
  out.action.e = best_e;
  out.action.tp = pb.slot.d + best_e - pb.slot.rp;
  out.hbar = th.hbar;
  if (best_e <= box.lo)
    out.branch = ResponseBranch::lower_bound;
  else if (best_e >= box.hi)
    out.branch = ResponseBranch::upper_bound;
  else if (best_e == kink)
    out.branch = ResponseBranch::kink;
  else
    out.branch = best_e > kink ? ResponseBranch::buy_interior : ResponseBranch::sell_interior;
  return out;
}

FollowerAction best_response(const FollowerProblem& pb, const LeaderAction& leader) {
  return best_response_detail(pb, leader).action;
}

std::vector<double> price_breakpoints(const FollowerProblem& pb) {
  const auto& p = pb.params;
  const Interval box = feasible_box(pb);
  std::vector<double> out;
  if (p.gamma > 0.0) {
    const FollowerThresholds th = compute_thresholds(pb);
    for (double e : {box.lo, box.hi, pb.slot.rp - pb.slot.d})
      out.push_back((th.vartheta - e) / th.hbar);
  } else {
    // Piecewise-linear objective: the response flips where a branch slope
    // changes sign.
    out.push_back(-linear_coefficient(pb) / pb.control.v);
  }
  return out;
}

FollowerBounds compute_bounds(const NanogridParams& p, double v, const FollowerEnvelope& env) {
  p.validate();
  if (p.mode != HvacMode::heating)
    throw ConfigError("comfort bounds are only derived for heating mode");
  if (!(env.t_out_max <= p.t_max))
    throw ConfigError("assumption (a) violated: max outdoor temperature " +
                      describe(env.t_out_max) + " exceeds t_max " + describe(p.t_max));
  if (!(p.eta * p.e_max + env.t_out_min >= p.t_min))
    throw ConfigError("assumption (b) violated: eta*e_max + min outdoor temperature is below t_min");
  const double eps = p.epsilon;
  const double om = 1.0 - eps;
  const double band = p.t_max - p.t_min;

  FollowerBounds b;
  b.phi = om * (env.t_out_max + p.eta * p.e_max - env.t_out_min);
  b.lambda = env.t_opt_max - env.t_opt_min;
  if (!(band > b.phi))
    throw ConfigError("assumption (c) violated: t_max - t_min = " + describe(band) +
                      " does not exceed phi = " + describe(b.phi));
  b.v_max = om * p.eta * (band - b.phi) /
            (env.p_s_max - env.p_b_min +
             2.0 * p.gamma * om * p.eta * (b.phi + eps * band + b.lambda));

  // alpha and beta depend on T^k; T^k stays in [t_min, t_max] by induction,
  // so their extremes are taken over that band and the scenario envelope.
  const double k1 = 2.0 * v * p.gamma * om * p.eta;
  const double alpha_min = k1 * (om * env.t_out_min + eps * p.t_min - env.t_opt_max);
  const double alpha_max = k1 * (om * env.t_out_max + eps * p.t_max - env.t_opt_min);
  const double beta_max = alpha_max + 2.0 * v * p.gamma * om * om * p.eta * p.eta * p.e_max;
  const double c = eps * om * p.eta;
  b.gamma_min = (v * env.p_b_min + alpha_min) / (-c) -
                (p.t_max - om * (env.t_out_max + p.e_max * p.eta)) / eps;
  b.gamma_max = (v * env.p_s_max + beta_max) / (-c) - (p.t_min - om * env.t_out_min) / eps;
  const double lo = b.gamma_min + env.t_out_min;
  const double hi = b.gamma_min + env.t_out_max + p.eta * p.e_max;
  b.omega_max = 0.5 * om * om * std::max(lo * lo, hi * hi);
  return b;
}

FollowerBounds compute_bounds(const NanogridParams& p, const FollowerEnvelope& env) {
  const FollowerBounds probe = compute_bounds(p, 1.0, env);
  return compute_bounds(p, probe.v_max, env);
}

void validate_control(const NanogridControl& control, const FollowerBounds& b) {
  if (!(control.v > 0.0)) throw ConfigError("v_i must be positive");
  if (control.v > b.v_max * (1.0 + 1e-12))
    throw ConfigError("v_i = " + describe(control.v) + " exceeds V_i^max = " + describe(b.v_max));
  const double tol = 1e-9 * (1.0 + std::abs(control.gamma_shift));
  if (control.gamma_shift < b.gamma_min - tol || control.gamma_shift > b.gamma_max + tol)
    throw ConfigError("gamma_shift = " + describe(control.gamma_shift) + " outside [" +
                      describe(b.gamma_min) + ", " + describe(b.gamma_max) + "]");
}

}  // namespace ems
