#pragma once

// Event-driven evolution: free flight under a constant generalized force,
// impact detection on s(q(t)) = 0, and impulsive jumps from resolve_impact.

#include "impulse/geometry.hpp"
#include "impulse/laws.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace impulse {

struct ScenarioConfig {
  explicit ScenarioConfig(MechanicalSystem sys) : system(std::move(sys)) {}

  MechanicalSystem system;
  ContactLaw law = ContactLaw::ideal();
  GeneralizedState initial;
  Vector force;  // constant generalized force
  double t_end = 1.0;
  double step = 1e-3;
  int max_impacts = 1000;
  double settle_speed = 1e-6;

  // Throws ErrorKind::Domain / Contract on violated invariants.
  void validate() const;
};

enum class EventKind { Impact, Settled };

struct ImpactEvent {
  EventKind kind = EventKind::Impact;
  double time = 0.0;
  Vector pre_qdot;
  Vector post_qdot;
  Branch branch = Branch::NotApplicable;
  Vector impulse;
  double delta_energy = 0.0;
};

enum class StopReason { EndTime, MaxImpacts, Settled };

std::string_view to_string(StopReason reason);

struct Trajectory {
  std::vector<GeneralizedState> samples;
  std::vector<ImpactEvent> events;
  StopReason stop = StopReason::EndTime;

  std::size_t impact_count() const;
};

// Advances (q, qdot) by dt under qddot = G^-1 force. Exact for a constant
// metric; classical RK4 otherwise.
GeneralizedState integrate_free_flight(const MechanicalSystem& system, const Vector& force,
                                       const GeneralizedState& state, double dt);

// Offset into the step of the earliest crossing of s = 0, if any. The step is
// split into 8 subintervals and the first bracket is bisected to 1e-12 * dt.
// The returned offset is on the admissible side of the root.
std::optional<double> detect_impact(const MechanicalSystem& system, const Vector& force,
                                    const GeneralizedState& state, double dt);

// Potential of the constant force: -force . q.
double potential_energy(const Vector& force, const Vector& q);

Trajectory run_simulation(const ScenarioConfig& config);

enum class SweepMode { SingleImpact, Simulation };

struct SweepRow {
  double value = 0.0;
  Branch branch = Branch::NotApplicable;
  Vector right_velocity;
  double delta_energy = 0.0;
  std::size_t impacts = 0;
};

// Produces the configuration for one sweep value. Throws
// ErrorKind::UnknownParameter when the parameter does not exist.
using ConfigFactory = std::function<ScenarioConfig(double value)>;

// Runs every value (in parallel when `threads` > 1) and returns rows in input
// order. SingleImpact resolves the initial state directly; Simulation reports
// the first impact's branch and right velocity and the summed energy change.
std::vector<SweepRow> sweep(const ConfigFactory& factory, const std::vector<double>& values,
                            SweepMode mode, unsigned threads = 0);

}  // namespace impulse
