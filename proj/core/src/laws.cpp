#include "impulse/laws.hpp"

#include "impulse/errors.hpp"

#include <cmath>
#include <sstream>

namespace impulse {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_range(double value, double lo, double hi, bool hi_open, const char* name) {
  const bool ok = std::isfinite(value) && value >= lo && (hi_open ? value < hi : value <= hi);
  if (!ok) {
    std::ostringstream os;
    os << name << " = " << value << " outside [" << lo << ", " << hi << (hi_open ? ")" : "]");
    fail(ErrorKind::Domain, os.str());
  }
}

void require_nonnegative(double value, const char* name) {
  if (!(std::isfinite(value) && value >= 0.0)) {
    std::ostringstream os;
    os << name << " = " << value << " must be finite and nonnegative";
    fail(ErrorKind::Domain, os.str());
  }
}

// Coulomb impulse with slip magnitude set by mu_slip; the branch test always
// uses mu_s. Ties go to stick.
ReactiveImpulse coulomb(const VelocitySplit& split, double e_S, double mu_s, double mu_slip) {
  ReactiveImpulse r;
  if (split.norm_ortho_B <= mu_s * split.norm_ortho_S) {
    r.branch = Branch::Stick;
    r.lambda = 1.0;
  } else {
    r.branch = Branch::Slip;
    r.lambda = mu_slip * split.norm_ortho_S / split.norm_ortho_B;
  }
  r.impulse = -(1.0 + e_S) * split.ortho_S - r.lambda * split.ortho_B;
  return r;
}

}  // namespace

ContactLaw::ContactLaw(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [](const Ideal&) {},
                 [](const Restitution& l) { require_range(l.e_S, 0.0, 1.0, false, "e_S"); },
                 [](const DoubleRestitution& l) {
                   require_range(l.e_S, 0.0, 1.0, false, "e_S");
                   require_range(l.e_B, 0.0, 1.0, true, "e_B");
                 },
                 [](const CoulombStatic& l) {
                   require_range(l.e_S, 0.0, 1.0, false, "e_S");
                   require_nonnegative(l.mu_s, "mu_s");
                 },
                 [](const CoulombDynamic& l) {
                   require_range(l.e_S, 0.0, 1.0, false, "e_S");
                   require_nonnegative(l.mu_s, "mu_s");
                   require_nonnegative(l.mu_d, "mu_d");
                   if (l.mu_d > l.mu_s) fail(ErrorKind::Domain, "mu_d must not exceed mu_s");
                 },
             },
             v_);
}

double ContactLaw::e_S() const noexcept {
  return std::visit(Overloaded{
                        [](const Ideal&) { return 1.0; },
                        [](const auto& l) { return l.e_S; },
                    },
                    v_);
}

std::string_view ContactLaw::name() const noexcept {
  return std::visit(Overloaded{
                        [](const Ideal&) { return std::string_view("ideal"); },
                        [](const Restitution&) { return std::string_view("restitution"); },
                        [](const DoubleRestitution&) { return std::string_view("double_restitution"); },
                        [](const CoulombStatic&) { return std::string_view("coulomb_static"); },
                        [](const CoulombDynamic&) { return std::string_view("coulomb_dynamic"); },
                    },
                    v_);
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::Stick: return "stick";
    case Branch::Slip: return "slip";
    case Branch::NotApplicable: return "n/a";
  }
  return "n/a";
}

ReactiveImpulse reactive_impulse(const ContactLaw& law, const VelocitySplit& split) {
  return std::visit(
      Overloaded{
          [&](const Ideal&) {
            return ReactiveImpulse{-2.0 * split.ortho_S, Branch::NotApplicable, 0.0};
          },
          [&](const Restitution& l) {
            return ReactiveImpulse{-(1.0 + l.e_S) * split.ortho_S, Branch::NotApplicable, 0.0};
          },
          [&](const DoubleRestitution& l) {
            const double lambda = 1.0 + l.e_B;
            return ReactiveImpulse{-(1.0 + l.e_S) * split.ortho_S - lambda * split.ortho_B,
                                   Branch::NotApplicable, lambda};
          },
          [&](const CoulombStatic& l) { return coulomb(split, l.e_S, l.mu_s, l.mu_s); },
          [&](const CoulombDynamic& l) { return coulomb(split, l.e_S, l.mu_s, l.mu_d); },
      },
      law.variant());
}

ImpactOutcome resolve_impact(const ContactFrame& frame, const Vector& qdot, const ContactLaw& law) {
  if (qdot.size() != frame.metric.rows()) fail(ErrorKind::Contract, "qdot has wrong length");
  ImpactOutcome out;
  out.split = triple_split(frame, qdot);
  const double approach = frame.normal.dot(qdot);
  if (out.split.norm_ortho_S <= zero_threshold(frame.metric, qdot)) {
    fail(ErrorKind::Grazing, "no normal approach velocity at the contact");
  }
  if (approach > 0.0) fail(ErrorKind::Contact, "velocity separates from the surface");

  const ReactiveImpulse r = reactive_impulse(law, out.split);
  out.impulse = r.impulse;
  out.right_velocity = qdot + r.impulse;
  out.branch = r.branch;
  out.lambda = r.lambda;
  out.delta_energy = energy_balance(out.split, law.e_S(), r.lambda);
  return out;
}

ImpactOutcome resolve_impact(const MechanicalSystem& system, const GeneralizedState& state,
                             const ContactLaw& law) {
  if (state.q.size() != system.dim() || state.qdot.size() != system.dim()) {
    fail(ErrorKind::Contract, "state dimension does not match the system");
  }
  if (system.check_configuration) system.check_configuration(state.q);
  const double s = system.surface.value(state.q);
  if (!(std::abs(s) <= contact_tolerance(state.q))) {
    std::ostringstream os;
    os << "state is off the contact surface (s = " << s << ")";
    fail(ErrorKind::Contact, os.str());
  }
  return resolve_impact(evaluate_frame(system, state.q), state.qdot, law);
}

double energy_balance(const VelocitySplit& split, double e_S, double lambda) {
  require_range(e_S, 0.0, 1.0, false, "e_S");
  require_range(lambda, 0.0, 2.0, false, "lambda");
  const double s2 = split.norm_ortho_S * split.norm_ortho_S;
  const double b2 = split.norm_ortho_B * split.norm_ortho_B;
  const double keep = 1.0 - lambda;
  return -0.5 * (1.0 - e_S * e_S) * s2 - 0.5 * (1.0 - keep * keep) * b2;
}

double friction_restitution_eB(const VelocitySplit& split, double mu_s) {
  require_nonnegative(mu_s, "mu_s");
  if (!(split.norm_ortho_B > 0.0)) {
    fail(ErrorKind::UndefinedRatio, "tangential component ortho_B vanishes");
  }
  const double capped = std::min(split.norm_ortho_B, mu_s * split.norm_ortho_S);
  return -1.0 + capped / split.norm_ortho_B;
}

}  // namespace impulse
