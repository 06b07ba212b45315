#pragma once

// Configuration-space data model and the kinetic-metric projections that split
// a left velocity relative to the contact surface S and the stick constraint B.
//
// All vectors are spatial components of velocities in generalized coordinates;
// scleronomic constraints are assumed, so relative velocities with respect to
// the trivial rest frame coincide with qdot.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace impulse {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Relative threshold for the pivot ratio of symmetric factorizations.
inline constexpr double kPivotRatio = 1e-12;

// Throws ErrorKind::Metric unless G is square, finite, symmetric and positive
// definite.
void validate_metric(const Matrix& G);

// Symmetric positive-definite mass matrix G(q).
class MassMetric {
 public:
  using Function = std::function<Matrix(const Vector&)>;

  static MassMetric constant(Matrix G);
  static MassMetric field(Index dim, Function f);

  Index dim() const noexcept { return dim_; }
  bool is_constant() const noexcept { return constant_; }

  // Evaluates and validates G at q.
  Matrix at(const Vector& q) const;

 private:
  MassMetric(Index dim, Function f, bool constant);

  Index dim_;
  Function f_;
  bool constant_;
};

struct GeneralizedState {
  double time = 0.0;
  Vector q;
  Vector qdot;
};

// Scalar constraint s(q) = 0 with s > 0 the admissible region.
class ContactSurface {
 public:
  using Value = std::function<double(const Vector&)>;
  using Gradient = std::function<RowVector(const Vector&)>;

  ContactSurface(Value value, Gradient gradient);

  double value(const Vector& q) const { return value_(q); }
  RowVector gradient(const Vector& q) const { return gradient_(q); }

 private:
  Value value_;
  Gradient gradient_;
};

// Rows C(q) with C(q) qdot = 0 meaning the contact point is at rest.
class StickConstraint {
 public:
  using Rows = std::function<Matrix(const Vector&)>;

  explicit StickConstraint(Rows rows);

  Matrix rows(const Vector& q) const { return rows_(q); }

 private:
  Rows rows_;
};

// A holonomic system together with its unilateral contact data.
struct MechanicalSystem {
  std::string name;
  std::vector<std::string> coordinates;
  MassMetric metric;
  ContactSurface surface;
  StickConstraint stick;
  // Optional domain check; throws ErrorKind::Configuration on failure.
  std::function<void(const Vector&)> check_configuration;

  Index dim() const noexcept { return metric.dim(); }
};

// Tolerance on |s(q)| for a state to count as touching the surface.
double contact_tolerance(const Vector& q);

// Contact data evaluated at one configuration.
struct ContactFrame {
  Matrix metric;
  RowVector normal;  // gradient of s
  Matrix stick;      // k x n
};

// Evaluates and validates the frame: SPD metric, nonzero gradient, full rank
// stick rows independent of the surface gradient.
ContactFrame evaluate_frame(const MassMetric& metric, const ContactSurface& surface,
                            const StickConstraint& stick, const Vector& q);
ContactFrame evaluate_frame(const MechanicalSystem& system, const Vector& q);

// Triple decomposition qdot = parallel_B + ortho_B + ortho_S.
struct VelocitySplit {
  Vector parallel_B;
  Vector ortho_B;
  Vector ortho_S;
  double norm_ortho_B = 0.0;
  double norm_ortho_S = 0.0;
};

double metric_inner(const Matrix& G, const Vector& u, const Vector& v);
double metric_norm(const Matrix& G, const Vector& v);
double kinetic_energy(const Matrix& G, const Vector& qdot);

// Scale-aware zero threshold for vectors derived from qdot.
double zero_threshold(const Matrix& G, const Vector& qdot);

Vector project_ortho_S(const Matrix& G, const RowVector& normal, const Vector& qdot);
Vector project_ortho_S(const MassMetric& metric, const ContactSurface& surface,
                       const GeneralizedState& state);

Vector project_ortho_B(const ContactFrame& frame, const Vector& qdot);
Vector project_ortho_B(const MassMetric& metric, const ContactSurface& surface,
                       const StickConstraint& stick, const GeneralizedState& state);

VelocitySplit triple_split(const ContactFrame& frame, const Vector& qdot);
VelocitySplit triple_split(const MassMetric& metric, const ContactSurface& surface,
                           const StickConstraint& stick, const GeneralizedState& state);

// argmin_w (v - w)^T G (v - w) subject to rows * w = 0, via the KKT system.
// Independent of the closed-form projectors; used to cross-check them.
Vector projection_oracle(const Matrix& G, const Matrix& rows, const Vector& v);

}  // namespace impulse
