#pragma once

// The feasible set M = { U in St(n, 4) : U e_4 = mhat } for a fixed unit mass
// vector mhat. M is totally geodesic in St(n, 4), so exp and log reduce to
// St(n, 3) on the first three columns.

#include "sfm/stiefel.hpp"

namespace sfm {

class MassManifoldPoint {
 public:
  /// Checks p = 4, last column equal to mhat to 1e-10, mhat unit with
  /// strictly positive entries.
  MassManifoldPoint(StiefelPoint point, Vector mhat);

  const StiefelPoint& point() const { return point_; }
  const Matrix& matrix() const { return point_.matrix(); }
  const Vector& mhat() const { return mhat_; }
  Eigen::Index n() const { return point_.n(); }
  /// First three columns.
  Matrix frame() const { return point_.matrix().leftCols(3); }

 private:
  StiefelPoint point_;
  Vector mhat_;
};

/// Selects the St(n, 3) reduction (default) or the full St(n, 4) route.
enum class MassRoute { Reduced, Full };

/// Rotates U by R = H(y) H((x + y) / ||x + y||), x the last column of U, so the
/// last column becomes y. Uses H(y) H(w) with w ⊥ y in the antipodal case.
/// Returns a plain Stiefel point since y need not be a mass vector.
StiefelPoint householder_align(const StiefelPoint& u, const Vector& y);

/// The rotation R itself (n x n), exposed for tests.
Matrix householder_rotation(const Vector& x, const Vector& y);

MassManifoldPoint uniform_on_M(const Vector& mhat, Rng& rng);

/// Minimum-norm projection of [Z 0] onto T_U M (Z is n x 3). Returns an
/// n x 4 tangent whose last column is zero.
TangentVec tangent_project_M(const MassManifoldPoint& u, const Matrix& z);

MassManifoldPoint exp_M(const MassManifoldPoint& u, const TangentVec& d, double t = 1.0,
                        MassRoute route = MassRoute::Reduced);

LogResult log_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1, LogOptions opts = {},
                MassRoute route = MassRoute::Reduced);

double approx_distance_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1);
/// Throws LogNotConverged.
double distance_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1, LogOptions opts = {});

/// Nearest point of M to an n x 4 matrix whose last column is ignored: the
/// first three columns are projected off mhat and replaced by their polar factor.
MassManifoldPoint project_to_M(const Matrix& a, const Vector& mhat);

/// Maximum absolute deviation of the last column from mhat.
double mass_column_deviation(const Matrix& u, const Vector& mhat);

}  // namespace sfm
