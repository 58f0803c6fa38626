#pragma once

// The Stiefel manifold St(n, p) of column-orthonormal n x p matrices under the
// canonical metric <D, E>_U = tr D^T (I - U U^T / 2) E.

#include "sfm/numkernels.hpp"
#include "sfm/rng.hpp"

namespace sfm {

/// Column-orthonormal n x p matrix. Construction checks ||U^T U - I||_F < 1e-10.
class StiefelPoint {
 public:
  explicit StiefelPoint(Matrix u);

  const Matrix& matrix() const { return u_; }
  Eigen::Index n() const { return u_.rows(); }
  Eigen::Index p() const { return u_.cols(); }

 private:
  Matrix u_;
};

/// Tangent vector D at a base point: U^T D + D^T U = 0 (checked to 1e-10,
/// relative to ||D|| when that exceeds one).
class TangentVec {
 public:
  TangentVec(StiefelPoint base, Matrix d);

  static TangentVec zero(const StiefelPoint& base);

  const StiefelPoint& base() const { return base_; }
  const Matrix& matrix() const { return d_; }

  TangentVec scaled(double s) const;

 private:
  StiefelPoint base_;
  Matrix d_;
};

struct LogOptions {
  int max_iter = 20;
  double tol = 1e-6;
};

struct LogResult {
  TangentVec tangent;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
};

double canonical_inner(const TangentVec& a, const TangentVec& b);
double canonical_norm(const TangentVec& d);
/// ||D||_F^2 - ||U^T D||_F^2 / 2, the rearranged squared norm.
double canonical_norm_sq(const Matrix& u, const Matrix& d);

/// Geodesic gamma(t) with gamma(0) = U and gamma'(0) = D (closed form).
StiefelPoint stiefel_exp(const StiefelPoint& u, const TangentVec& d, double t = 1.0);

/// Iterative logarithm. The residual is ||C||_F of the lower-right block of the
/// current log(V); iteration stops once it is <= tol. Non-convergence returns
/// the best iterate with converged = false. Throws NonPrincipal when the
/// iteration leaves the principal branch.
LogResult stiefel_log(const StiefelPoint& u0, const StiefelPoint& u1, LogOptions opts = {});

/// exp_{U0}(t log_{U0}(U1)). Throws LogNotConverged.
StiefelPoint geodesic_interpolate(const StiefelPoint& u0, const StiefelPoint& u1, double t,
                                  LogOptions opts = {});

/// Haar-uniform sample Z (Z^T Z)^{-1/2} with Z i.i.d. standard normal.
StiefelPoint haar_uniform(Eigen::Index n, Eigen::Index p, Rng& rng);

StiefelPoint project_to_manifold(const Matrix& a);
TangentVec project_to_tangent(const StiefelPoint& u, const Matrix& z);

/// Canonical norm of the logarithm truncated to a single inner iteration.
double approx_distance(const StiefelPoint& u0, const StiefelPoint& u1);

/// Canonical norm of the converged logarithm. Throws LogNotConverged.
double distance(const StiefelPoint& u0, const StiefelPoint& u1, LogOptions opts = {});

namespace raw {

// Unchecked matrix-level kernels shared with the mass manifold.

Matrix exp(const Matrix& u, const Matrix& d, double t);

struct Log {
  Matrix tangent;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

Log log(const Matrix& u0, const Matrix& u1, LogOptions opts);

}  // namespace raw

}  // namespace sfm
