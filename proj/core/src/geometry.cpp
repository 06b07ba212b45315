#include "impulse/geometry.hpp"

#include "impulse/errors.hpp"

#include <cmath>
#include <sstream>

namespace impulse {
namespace {

void require_dim(Index expected, Index actual, const char* what) {
  if (expected != actual) {
    std::ostringstream os;
    os << what << " has length " << actual << ", expected " << expected;
    fail(ErrorKind::Contract, os.str());
  }
}

// LDLT with a pivot-ratio rank test. The systems solved here are symmetric
// positive definite in exact arithmetic.
Eigen::LDLT<Matrix> factor_symmetric(const Matrix& A, ErrorKind kind, const char* what) {
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) fail(kind, std::string(what) + ": factorization failed");
  const Vector d = ldlt.vectorD().cwiseAbs();
  const double largest = d.size() > 0 ? d.maxCoeff() : 0.0;
  if (d.size() > 0 && (!(largest > 0.0) || d.minCoeff() < kPivotRatio * largest)) {
    fail(kind, std::string(what) + ": numerically rank deficient");
  }
  return ldlt;
}

// Orthonormal (Euclidean) basis of ker(normal), n x (n-1).
Matrix tangent_basis(const RowVector& normal) {
  const Index n = normal.size();
  Eigen::HouseholderQR<Matrix> qr(Matrix(normal.transpose()));
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - 1);
}

void require_nonzero_normal(const RowVector& normal) {
  if (!normal.allFinite() || normal.squaredNorm() == 0.0) {
    fail(ErrorKind::DegenerateSurface, "surface gradient vanishes");
  }
}

}  // namespace

void validate_metric(const Matrix& G) {
  if (G.rows() != G.cols()) fail(ErrorKind::Metric, "mass matrix is not square");
  if (G.size() == 0) fail(ErrorKind::Metric, "mass matrix is empty");
  if (!G.allFinite()) fail(ErrorKind::Metric, "mass matrix has non-finite entries");
  const double scale = G.cwiseAbs().maxCoeff();
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 4.0 * Eigen::NumTraits<double>::epsilon() * scale) {
    fail(ErrorKind::Metric, "mass matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) {
    std::ostringstream os;
    os << "mass matrix is not positive definite: smallest eigenvalue " << smallest
       << (smallest < 0.0 ? " (negative)" : " (zero)");
    fail(ErrorKind::Metric, os.str());
  }
}

MassMetric::MassMetric(Index dim, Function f, bool constant)
    : dim_(dim), f_(std::move(f)), constant_(constant) {}

MassMetric MassMetric::constant(Matrix G) {
  validate_metric(G);
  const Index n = G.rows();
  return MassMetric(n, [G = std::move(G)](const Vector&) { return G; }, true);
}

MassMetric MassMetric::field(Index dim, Function f) {
  if (dim < 1) fail(ErrorKind::Contract, "metric dimension must be positive");
  return MassMetric(dim, std::move(f), false);
}

Matrix MassMetric::at(const Vector& q) const {
  require_dim(dim_, q.size(), "configuration");
  Matrix G = f_(q);
  if (G.rows() != dim_ || G.cols() != dim_) fail(ErrorKind::Contract, "metric has wrong shape");
  if (!constant_) validate_metric(G);
  return G;
}

ContactSurface::ContactSurface(Value value, Gradient gradient)
    : value_(std::move(value)), gradient_(std::move(gradient)) {}

StickConstraint::StickConstraint(Rows rows) : rows_(std::move(rows)) {}

double contact_tolerance(const Vector& q) { return 1e-8 * (1.0 + q.norm()); }

ContactFrame evaluate_frame(const MassMetric& metric, const ContactSurface& surface,
                            const StickConstraint& stick, const Vector& q) {
  ContactFrame frame{metric.at(q), surface.gradient(q), stick.rows(q)};
  const Index n = metric.dim();
  require_dim(n, frame.normal.size(), "surface gradient");
  require_nonzero_normal(frame.normal);
  const Index k = frame.stick.rows();
  if (frame.stick.cols() != n) fail(ErrorKind::Contract, "stick rows have wrong column count");
  if (k < 1 || k > n - 1) {
    fail(ErrorKind::DegenerateConstraint, "stick constraint needs between 1 and n-1 rows");
  }
  if (!frame.stick.allFinite()) fail(ErrorKind::DegenerateConstraint, "stick rows are not finite");

  Eigen::JacobiSVD<Matrix> svd_c(frame.stick);
  const Vector sc = svd_c.singularValues();
  if (!(sc(k - 1) > kPivotRatio * sc(0))) {
    fail(ErrorKind::DegenerateConstraint, "stick rows are not of full row rank");
  }
  Matrix stacked(k + 1, n);
  stacked.row(0) = frame.normal;
  stacked.bottomRows(k) = frame.stick;
  Eigen::JacobiSVD<Matrix> svd_s(stacked);
  const Vector ss = svd_s.singularValues();
  if (!(ss(k) > kPivotRatio * ss(0))) {
    fail(ErrorKind::DegenerateConstraint,
         "stick rows are not independent of the surface gradient");
  }
  return frame;
}

ContactFrame evaluate_frame(const MechanicalSystem& system, const Vector& q) {
  return evaluate_frame(system.metric, system.surface, system.stick, q);
}

double metric_inner(const Matrix& G, const Vector& u, const Vector& v) {
  require_dim(G.rows(), u.size(), "u");
  require_dim(G.rows(), v.size(), "v");
  return u.dot(G * v);
}

double metric_norm(const Matrix& G, const Vector& v) {
  return std::sqrt(std::max(0.0, metric_inner(G, v, v)));
}

double kinetic_energy(const Matrix& G, const Vector& qdot) { return 0.5 * metric_inner(G, qdot, qdot); }

double zero_threshold(const Matrix& G, const Vector& qdot) {
  return 1e-12 * (1.0 + metric_norm(G, qdot));
}

Vector project_ortho_S(const Matrix& G, const RowVector& normal, const Vector& qdot) {
  const Index n = G.rows();
  require_dim(n, normal.size(), "surface gradient");
  require_dim(n, qdot.size(), "qdot");
  require_nonzero_normal(normal);
  const auto ldlt = factor_symmetric(G, ErrorKind::Metric, "mass matrix");
  const Vector direction = ldlt.solve(normal.transpose());  // G^-1 grad^T
  const double denom = normal.dot(direction);
  if (!(denom > 0.0)) fail(ErrorKind::DegenerateSurface, "surface normal has zero metric length");
  return direction * (normal.dot(qdot) / denom);
}

Vector project_ortho_S(const MassMetric& metric, const ContactSurface& surface,
                       const GeneralizedState& state) {
  return project_ortho_S(metric.at(state.q), surface.gradient(state.q), state.qdot);
}

Vector project_ortho_B(const ContactFrame& frame, const Vector& qdot) {
  const Matrix& G = frame.metric;
  const Index n = G.rows();
  require_dim(n, qdot.size(), "qdot");
  const Vector tangential = qdot - project_ortho_S(G, frame.normal, qdot);

  // Work inside ker(grad s) so the projector never leaves the tangent space of S.
  const Matrix N = tangent_basis(frame.normal);
  const Matrix G_t = N.transpose() * G * N;
  const Matrix C_t = frame.stick * N;
  const Vector z = N.transpose() * tangential;

  // ker(C_t) from a QR of C_t^T; its metric projection is the parallel part.
  const Index k = C_t.rows();
  Eigen::ColPivHouseholderQR<Matrix> qr(C_t.transpose());
  qr.setThreshold(kPivotRatio);
  if (qr.rank() != k) fail(ErrorKind::DegenerateConstraint, "restricted stick rows are rank deficient");
  const Index free = C_t.cols() - k;
  if (free == 0) return N * z;
  const Matrix Q = qr.householderQ();
  const Matrix K = Q.rightCols(free);
  const auto k_ldlt = factor_symmetric(K.transpose() * G_t * K, ErrorKind::Metric, "restricted mass matrix");
  const Vector parallel = K * k_ldlt.solve(K.transpose() * (G_t * z));
  return N * (z - parallel);
}

Vector project_ortho_B(const MassMetric& metric, const ContactSurface& surface,
                       const StickConstraint& stick, const GeneralizedState& state) {
  return project_ortho_B(evaluate_frame(metric, surface, stick, state.q), state.qdot);
}

VelocitySplit triple_split(const ContactFrame& frame, const Vector& qdot) {
  const Matrix& G = frame.metric;
  VelocitySplit split;
  split.ortho_S = project_ortho_S(G, frame.normal, qdot);
  split.ortho_B = project_ortho_B(frame, qdot);
  split.parallel_B = qdot - split.ortho_B - split.ortho_S;
  split.norm_ortho_B = metric_norm(G, split.ortho_B);
  split.norm_ortho_S = metric_norm(G, split.ortho_S);
  return split;
}

VelocitySplit triple_split(const MassMetric& metric, const ContactSurface& surface,
                           const StickConstraint& stick, const GeneralizedState& state) {
  return triple_split(evaluate_frame(metric, surface, stick, state.q), state.qdot);
}

Vector projection_oracle(const Matrix& G, const Matrix& rows, const Vector& v) {
  const Index n = G.rows();
  require_dim(n, v.size(), "v");
  if (rows.rows() == 0) return v;
  if (rows.cols() != n) fail(ErrorKind::Contract, "constraint rows have wrong column count");
  const Index m = rows.rows();

  // [G  R^T] [w ]   [G v]
  // [R  0  ] [nu] = [ 0 ]
  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = G;
  kkt.topRightCorner(n, m) = rows.transpose();
  kkt.bottomLeftCorner(m, n) = rows;
  Vector rhs = Vector::Zero(n + m);
  rhs.head(n) = G * v;

  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(kPivotRatio);
  if (!lu.isInvertible()) fail(ErrorKind::Rank, "KKT system is singular");
  return lu.solve(rhs).head(n);
}

}  // namespace impulse
