#include "impulse/simulator.hpp"

#include "impulse/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace impulse {
namespace {

constexpr int kSubdivisions = 8;
constexpr double kTimeTolerance = 1e-12;

Vector acceleration(const MechanicalSystem& system, const Vector& force, const Vector& q) {
  const Matrix G = system.metric.at(q);
  return G.ldlt().solve(force);
}

// Smallest positive time offset that still advances `t` in floating point.
double separation_offset(double t, double step) {
  const double ulp_guard = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
  return std::max(kTimeTolerance * step, ulp_guard);
}

}  // namespace

void ScenarioConfig::validate() const {
  const Index n = system.dim();
  if (initial.q.size() != n || initial.qdot.size() != n) {
    fail(ErrorKind::Contract, "initial state dimension does not match the system");
  }
  if (force.size() != n) fail(ErrorKind::Contract, "force dimension does not match the system");
  if (!(step > 0.0)) fail(ErrorKind::Domain, "step must be positive");
  if (!(t_end > initial.time)) fail(ErrorKind::Domain, "t_end must exceed the initial time");
  if (max_impacts < 1) fail(ErrorKind::Domain, "max_impacts must be at least 1");
  if (!(settle_speed >= 0.0)) fail(ErrorKind::Domain, "settle_speed must be nonnegative");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::EndTime: return "end_time";
    case StopReason::MaxImpacts: return "max_impacts";
    case StopReason::Settled: return "settled";
  }
  return "?";
}

std::size_t Trajectory::impact_count() const {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [](const ImpactEvent& e) { return e.kind == EventKind::Impact; }));
}

GeneralizedState integrate_free_flight(const MechanicalSystem& system, const Vector& force,
                                       const GeneralizedState& state, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::Domain, "flight step must be positive");
  GeneralizedState next{state.time + dt, state.q, state.qdot};
  if (system.metric.is_constant()) {
    const Vector a = acceleration(system, force, state.q);
    next.q = state.q + dt * state.qdot + (0.5 * dt * dt) * a;
    next.qdot = state.qdot + dt * a;
    return next;
  }
  const Vector& q0 = state.q;
  const Vector& v0 = state.qdot;
  const Vector a1 = acceleration(system, force, q0);
  const Vector v2 = v0 + 0.5 * dt * a1;
  const Vector a2 = acceleration(system, force, q0 + 0.5 * dt * v0);
  const Vector v3 = v0 + 0.5 * dt * a2;
  const Vector a3 = acceleration(system, force, q0 + 0.5 * dt * v2);
  const Vector v4 = v0 + dt * a3;
  const Vector a4 = acceleration(system, force, q0 + dt * v3);
  next.q = q0 + (dt / 6.0) * (v0 + 2.0 * v2 + 2.0 * v3 + v4);
  next.qdot = v0 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return next;
}

std::optional<double> detect_impact(const MechanicalSystem& system, const Vector& force,
                                    const GeneralizedState& state, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::Domain, "detection step must be positive");
  auto height = [&](double tau) {
    if (tau == 0.0) return system.surface.value(state.q);
    return system.surface.value(integrate_free_flight(system, force, state, tau).q);
  };
  double lo = 0.0;
  double s_lo = height(0.0);
  if (s_lo < 0.0) return std::nullopt;
  for (int k = 1; k <= kSubdivisions; ++k) {
    const double hi_k = dt * k / kSubdivisions;
    const double s_hi = height(hi_k);
    if (s_hi < 0.0) {
      double hi = hi_k;
      const double tol = kTimeTolerance * dt;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (height(mid) < 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return lo;
    }
    lo = hi_k;
    s_lo = s_hi;
  }
  return std::nullopt;
}

double potential_energy(const Vector& force, const Vector& q) { return -force.dot(q); }

Trajectory run_simulation(const ScenarioConfig& config) {
  config.validate();
  const MechanicalSystem& system = config.system;
  Trajectory traj;
  GeneralizedState state = config.initial;
  traj.samples.push_back(state);
  int impacts = 0;

  while (state.time < config.t_end) {
    const double dt = std::min(config.step, config.t_end - state.time);
    if (!(dt > 0.0)) break;
    const std::optional<double> hit_at = detect_impact(system, config.force, state, dt);
    if (!hit_at) {
      state = integrate_free_flight(system, config.force, state, dt);
      if (config.t_end - state.time < separation_offset(state.time, config.step)) state.time = config.t_end;
      traj.samples.push_back(state);
      continue;
    }

    GeneralizedState hit = *hit_at > 0.0 ? integrate_free_flight(system, config.force, state, *hit_at) : state;
    if (hit.time > traj.samples.back().time) traj.samples.push_back(hit);

    const std::string where = [&] {
      std::ostringstream os;
      os.precision(17);
      os << "impact " << impacts + 1 << " at t = " << hit.time << ": ";
      return os.str();
    }();

    ImpactOutcome outcome;
    try {
      if (system.check_configuration) system.check_configuration(hit.q);
      const ContactFrame frame = evaluate_frame(system, hit.q);
      const double normal_speed = metric_norm(frame.metric, project_ortho_S(frame.metric, frame.normal, hit.qdot));
      if (normal_speed < config.settle_speed) {
        const Index n = system.dim();
        traj.events.push_back(ImpactEvent{EventKind::Settled, hit.time, hit.qdot, hit.qdot,
                                          Branch::NotApplicable, Vector::Zero(n), 0.0});
        traj.stop = StopReason::Settled;
        return traj;
      }
      outcome = resolve_impact(frame, hit.qdot, config.law);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Grazing) {
        // Pass through without an impulse.
        state = integrate_free_flight(system, config.force, state, dt);
        traj.samples.push_back(state);
        continue;
      }
      throw Error(e.kind(), where + e.what());
    }

    ++impacts;
    traj.events.push_back(ImpactEvent{EventKind::Impact, hit.time, hit.qdot, outcome.right_velocity,
                                      outcome.branch, outcome.impulse, outcome.delta_energy});
    GeneralizedState post{hit.time, hit.q, outcome.right_velocity};
    state = integrate_free_flight(system, config.force, post, separation_offset(hit.time, config.step));
    traj.samples.push_back(state);
    if (impacts >= config.max_impacts) {
      traj.stop = StopReason::MaxImpacts;
      return traj;
    }
  }
  traj.stop = StopReason::EndTime;
  return traj;
}

std::vector<SweepRow> sweep(const ConfigFactory& factory, const std::vector<double>& values,
                            SweepMode mode, unsigned threads) {
  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());

  auto run_one = [&](std::size_t i) {
    try {
      const ScenarioConfig config = factory(values[i]);
      SweepRow& row = rows[i];
      row.value = values[i];
      if (mode == SweepMode::SingleImpact) {
        const ImpactOutcome out = resolve_impact(config.system, config.initial, config.law);
        row.branch = out.branch;
        row.right_velocity = out.right_velocity;
        row.delta_energy = out.delta_energy;
        row.impacts = 1;
        return;
      }
      const Trajectory traj = run_simulation(config);
      row.right_velocity = traj.samples.back().qdot;
      bool first = true;
      for (const ImpactEvent& e : traj.events) {
        if (e.kind != EventKind::Impact) continue;
        if (first) {
          row.branch = e.branch;
          row.right_velocity = e.post_qdot;
          first = false;
        }
        row.delta_energy += e.delta_energy;
        ++row.impacts;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, values.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) run_one(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace impulse
