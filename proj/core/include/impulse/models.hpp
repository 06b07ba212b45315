#pragma once

// Builtin planar models striking a rough horizontal line, with the closed-form
// projections printed for each as independent oracles.

#include "impulse/geometry.hpp"

#include <map>
#include <string>

namespace impulse {

struct ModelSpec {
  std::string name;  // "point", "disk" or "rod"
  std::map<std::string, double> parameters;
  MechanicalSystem system;

  double parameter(const std::string& key) const;
};

// Material point (x, y), G = diag(m, m), s = y, stick row (1, 0).
ModelSpec build_point(double m);

// Disk (x, y, theta), G = diag(m, m, A), s = y - R, stick row (1, 0, -R).
ModelSpec build_disk(double m, double R, double A);

// Rod of length 2L (x, y, theta), G = diag(m, m, A), s = y - L sin(theta),
// stick row (1, 0, -L sin(theta)). Valid for theta in (0, pi).
ModelSpec build_rod(double m, double L, double A);

// Builds a model by name from a parameter map. Missing or extra parameters are
// ErrorKind::UnknownParameter; unknown names are ErrorKind::UnknownModel.
ModelSpec build_model(const std::string& name, const std::map<std::string, double>& parameters);

// Hard-coded closed-form split for a builtin model.
VelocitySplit analytic_split_oracle(const ModelSpec& model, const GeneralizedState& state);

// Upper bound on cos^2(theta) below which a rod falling vertically in the
// stick branch rebounds with positive vertical velocity.
double rod_rebound_threshold(double m, double L, double A, double e_S);

}  // namespace impulse
