#include "impulse/models.hpp"

#include "impulse/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace impulse {
namespace {

void require_positive(double value, const char* name) {
  if (!(std::isfinite(value) && value > 0.0)) {
    std::ostringstream os;
    os << "parameter " << name << " = " << value << " must be positive";
    fail(ErrorKind::Domain, os.str());
  }
}

Matrix diagonal(std::initializer_list<double> entries) {
  Vector d(static_cast<Index>(entries.size()));
  Index i = 0;
  for (double e : entries) d(i++) = e;
  return d.asDiagonal();
}

double take(const std::map<std::string, double>& params, const std::string& model,
            const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) {
    fail(ErrorKind::UnknownParameter, "model " + model + " requires parameter " + key);
  }
  return it->second;
}

void reject_extra(const std::map<std::string, double>& params, const std::string& model,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    bool known = key == "g";
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(ErrorKind::UnknownParameter, "model " + model + " has no parameter " + key);
  }
}

}  // namespace

double ModelSpec::parameter(const std::string& key) const {
  return take(parameters, name, key);
}

ModelSpec build_point(double m) {
  require_positive(m, "m");
  ModelSpec spec{
      "point",
      {{"m", m}},
      MechanicalSystem{
          "point",
          {"x", "y"},
          MassMetric::constant(diagonal({m, m})),
          ContactSurface([](const Vector& q) { return q(1); },
                         [](const Vector&) { return RowVector{{0.0, 1.0}}; }),
          StickConstraint([](const Vector&) { return Matrix{{1.0, 0.0}}; }),
          {},
      },
  };
  return spec;
}

ModelSpec build_disk(double m, double R, double A) {
  require_positive(m, "m");
  require_positive(R, "R");
  require_positive(A, "A");
  return ModelSpec{
      "disk",
      {{"m", m}, {"R", R}, {"A", A}},
      MechanicalSystem{
          "disk",
          {"x", "y", "theta"},
          MassMetric::constant(diagonal({m, m, A})),
          ContactSurface([R](const Vector& q) { return q(1) - R; },
                         [](const Vector&) { return RowVector{{0.0, 1.0, 0.0}}; }),
          StickConstraint([R](const Vector&) { return Matrix{{1.0, 0.0, -R}}; }),
          {},
      },
  };
}

ModelSpec build_rod(double m, double L, double A) {
  require_positive(m, "m");
  require_positive(L, "L");
  require_positive(A, "A");
  return ModelSpec{
      "rod",
      {{"m", m}, {"L", L}, {"A", A}},
      MechanicalSystem{
          "rod",
          {"x", "y", "theta"},
          MassMetric::constant(diagonal({m, m, A})),
          ContactSurface([L](const Vector& q) { return q(1) - L * std::sin(q(2)); },
                         [L](const Vector& q) { return RowVector{{0.0, 1.0, -L * std::cos(q(2))}}; }),
          StickConstraint([L](const Vector& q) { return Matrix{{1.0, 0.0, -L * std::sin(q(2))}}; }),
          [](const Vector& q) {
            if (!(q(2) > 0.0 && q(2) < std::numbers::pi)) {
              std::ostringstream os;
              os << "rod angle " << q(2) << " outside (0, pi)";
              fail(ErrorKind::Configuration, os.str());
            }
          },
      },
  };
}

ModelSpec build_model(const std::string& name, const std::map<std::string, double>& parameters) {
  ModelSpec spec = [&] {
    if (name == "point") {
      reject_extra(parameters, name, {"m"});
      return build_point(take(parameters, name, "m"));
    }
    if (name == "disk") {
      reject_extra(parameters, name, {"m", "R", "A"});
      return build_disk(take(parameters, name, "m"), take(parameters, name, "R"),
                        take(parameters, name, "A"));
    }
    if (name == "rod") {
      reject_extra(parameters, name, {"m", "L", "A"});
      return build_rod(take(parameters, name, "m"), take(parameters, name, "L"),
                       take(parameters, name, "A"));
    }
    fail(ErrorKind::UnknownModel, "no builtin model named '" + name + "'");
  }();
  if (auto g = parameters.find("g"); g != parameters.end()) spec.parameters["g"] = g->second;
  return spec;
}

VelocitySplit analytic_split_oracle(const ModelSpec& model, const GeneralizedState& state) {
  const Vector& v = state.qdot;
  if (model.name != "point" && model.name != "disk" && model.name != "rod") {
    fail(ErrorKind::UnknownModel, "no analytic oracle for model '" + model.name + "'");
  }
  VelocitySplit split;
  const double m = model.parameter("m");
  if (model.name == "point") {
    split.parallel_B = Vector::Zero(2);
    split.ortho_S = Vector{{0.0, v(1)}};
    split.ortho_B = Vector{{v(0), 0.0}};
    split.norm_ortho_S = std::sqrt(m) * std::abs(v(1));
    split.norm_ortho_B = std::sqrt(m) * std::abs(v(0));
    return split;
  }
  const double A = model.parameter("A");
  if (model.name == "disk") {
    const double R = model.parameter("R");
    const double den = m * R * R + A;
    const double roll = (m * R * v(0) + A * v(2)) / den;
    const double slide = v(0) - R * v(2);
    split.parallel_B = Vector{{R * roll, 0.0, roll}};
    split.ortho_S = Vector{{0.0, v(1), 0.0}};
    split.ortho_B = Vector{{A / den * slide, 0.0, -m * R / den * slide}};
    split.norm_ortho_S = std::sqrt(m) * std::abs(v(1));
    split.norm_ortho_B = std::abs(slide) * std::sqrt(m * A / den);
    return split;
  }
  if (model.name == "rod") {
    const double L = model.parameter("L");
    const double th = state.q(2);
    const double s = std::sin(th);
    const double c = std::cos(th);
    const double den = m * L * L + A;
    const double den_c = m * L * L * c * c + A;
    const double along = (m * L * v(0) * s + m * L * v(1) * c + A * v(2)) / den;
    split.parallel_B = Vector{{L * s * along, L * c * along, along}};
    const double normal = v(1) - L * v(2) * c;
    split.ortho_S = Vector{{0.0, A / den_c * normal, -m * L * c / den_c * normal}};
    const double bracket = v(0) - L * s / den_c * (m * L * v(1) * c + A * v(2));
    split.ortho_B = Vector{{den_c / den * bracket, -m * L * L * s * c / den * bracket,
                            -m * L * s / den * bracket}};
    const Vector g{{m, m, A}};
    split.norm_ortho_S = std::sqrt(split.ortho_S.dot(g.cwiseProduct(split.ortho_S)));
    split.norm_ortho_B = std::sqrt(split.ortho_B.dot(g.cwiseProduct(split.ortho_B)));
    return split;
  }
  fail(ErrorKind::UnknownModel, "no analytic oracle for model '" + model.name + "'");
}

double rod_rebound_threshold(double m, double L, double A, double e_S) {
  require_positive(m, "m");
  require_positive(L, "L");
  require_positive(A, "A");
  if (!(e_S >= 0.0 && e_S <= 1.0)) fail(ErrorKind::Domain, "e_S outside [0, 1]");
  const double I = m * L * L;
  return A / (2.0 * I) * (std::sqrt(1.0 + 4.0 * e_S * (I + A) / A) - 1.0);
}

}  // namespace impulse
