#pragma once

// Constitutive characterizations of the rough unilateral constraint: each maps
// the triple split of a left velocity to a reactive impulse.

#include "impulse/geometry.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace impulse {

struct Ideal {};

struct Restitution {
  double e_S;
};

struct DoubleRestitution {
  double e_S;
  double e_B;
};

struct CoulombStatic {
  double e_S;
  double mu_s;
};

struct CoulombDynamic {
  double e_S;
  double mu_s;
  double mu_d;
};

class ContactLaw {
 public:
  using Variant = std::variant<Ideal, Restitution, DoubleRestitution, CoulombStatic, CoulombDynamic>;

  // Throws ErrorKind::Domain when a coefficient is out of range.
  ContactLaw(Variant v);  // NOLINT(google-explicit-constructor)

  static ContactLaw ideal() { return ContactLaw(Ideal{}); }
  static ContactLaw restitution(double e_S) { return ContactLaw(Restitution{e_S}); }
  static ContactLaw double_restitution(double e_S, double e_B) {
    return ContactLaw(DoubleRestitution{e_S, e_B});
  }
  static ContactLaw coulomb_static(double e_S, double mu_s) {
    return ContactLaw(CoulombStatic{e_S, mu_s});
  }
  static ContactLaw coulomb_dynamic(double e_S, double mu_s, double mu_d) {
    return ContactLaw(CoulombDynamic{e_S, mu_s, mu_d});
  }

  const Variant& variant() const noexcept { return v_; }
  // Normal restitution coefficient; 1 for Ideal.
  double e_S() const noexcept;
  std::string_view name() const noexcept;

 private:
  Variant v_;
};

enum class Branch { Stick, Slip, NotApplicable };

std::string_view to_string(Branch branch);

struct ReactiveImpulse {
  Vector impulse;
  Branch branch = Branch::NotApplicable;
  // Coefficient of ortho_B in -impulse.
  double lambda = 0.0;
};

ReactiveImpulse reactive_impulse(const ContactLaw& law, const VelocitySplit& split);

struct ImpactOutcome {
  VelocitySplit split;
  Vector impulse;
  Vector right_velocity;
  Branch branch = Branch::NotApplicable;
  double lambda = 0.0;
  double delta_energy = 0.0;
};

// Frame-level resolution. qdot must approach the surface (grad s . qdot < 0);
// grazing and separating velocities are rejected.
ImpactOutcome resolve_impact(const ContactFrame& frame, const Vector& qdot, const ContactLaw& law);

// Also checks that the state lies on the surface and inside the model domain.
ImpactOutcome resolve_impact(const MechanicalSystem& system, const GeneralizedState& state,
                             const ContactLaw& law);

// Kinetic energy change for impulse -(1+e_S) ortho_S - lambda ortho_B.
double energy_balance(const VelocitySplit& split, double e_S, double lambda);

// Tangential restitution coefficient that turns the double-restitution impulse
// into the static Coulomb impulse. Requires a nonzero ortho_B.
double friction_restitution_eB(const VelocitySplit& split, double mu_s);

}  // namespace impulse
