#include "sfm/massmanifold.hpp"

#include "sfm/errors.hpp"

#include <cmath>
#include <utility>

namespace sfm {

namespace {

constexpr double kMassTol = 1e-10;

Matrix reflect(const Vector& v, const Matrix& a) { return a - 2.0 * v * (v.transpose() * a); }

// Unit vector w with H(y) H(w) x = y for unit x, y.
Vector householder_axis(const Vector& x, const Vector& y) {
  const Vector s = x + y;
  const double len = s.norm();
  if (len >= 1e-8) return s / len;
  // antipodal: any w orthogonal to y; start from the basis vector least aligned with y
  Eigen::Index k = 0;
  y.cwiseAbs().minCoeff(&k);
  Vector w = Vector::Unit(y.size(), k);
  w -= w.dot(y) * y;
  return w.normalized();
}

Matrix pad_zero_column(const Matrix& d3) {
  Matrix d(d3.rows(), 4);
  d.leftCols(3) = d3;
  d.col(3).setZero();
  return d;
}

void require_zero_last_column(const TangentVec& d) {
  if (d.matrix().cols() != 4 || d.matrix().col(3).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("mass manifold tangent must have a zero last column");
  }
}

}  // namespace

MassManifoldPoint::MassManifoldPoint(StiefelPoint point, Vector mhat)
    : point_(std::move(point)), mhat_(std::move(mhat)) {
  if (point_.p() != 4) throw InvalidArgument("MassManifoldPoint: requires p = 4");
  if (mhat_.size() != point_.n()) throw InvalidArgument("MassManifoldPoint: mhat length mismatch");
  if (!(mhat_.minCoeff() > 0.0)) throw InvalidArgument("MassManifoldPoint: mhat must be positive");
  if (std::abs(mhat_.norm() - 1.0) > kMassTol) {
    throw InvalidArgument("MassManifoldPoint: mhat must have unit norm");
  }
  if (mass_column_deviation(point_.matrix(), mhat_) > kMassTol) {
    throw MassMismatch("MassManifoldPoint: last column differs from mhat");
  }
}

double mass_column_deviation(const Matrix& u, const Vector& mhat) {
  return (u.col(u.cols() - 1) - mhat).cwiseAbs().maxCoeff();
}

Matrix householder_rotation(const Vector& x, const Vector& y) {
  const Eigen::Index n = x.size();
  const Vector w = householder_axis(x, y);
  return reflect(y, reflect(w, Matrix::Identity(n, n)));
}

StiefelPoint householder_align(const StiefelPoint& u, const Vector& y) {
  if (y.size() != u.n()) throw InvalidArgument("householder_align: length mismatch");
  if (std::abs(y.norm() - 1.0) > 1e-10) throw InvalidArgument("householder_align: y must be unit");
  const Vector x = u.matrix().col(u.p() - 1);
  const Vector w = householder_axis(x, y);
  Matrix ru = reflect(y, reflect(w, u.matrix()));
  ru.col(u.p() - 1) = y;
  return StiefelPoint(std::move(ru));
}

MassManifoldPoint uniform_on_M(const Vector& mhat, Rng& rng) {
  return MassManifoldPoint(householder_align(haar_uniform(mhat.size(), 4, rng), mhat), mhat);
}

TangentVec tangent_project_M(const MassManifoldPoint& u, const Matrix& z) {
  if (z.rows() != u.n() || z.cols() != 3) throw InvalidArgument("tangent_project_M: Z must be n x 3");
  const Matrix& um = u.matrix();
  const Matrix ut = u.frame();
  const Matrix pz = ut * skew(ut.transpose() * z) + z - um * (um.transpose() * z);
  return TangentVec(u.point(), pad_zero_column(pz));
}

MassManifoldPoint exp_M(const MassManifoldPoint& u, const TangentVec& d, double t,
                        MassRoute route) {
  require_zero_last_column(d);
  if (route == MassRoute::Full) {
    return MassManifoldPoint(stiefel_exp(u.point(), d, t), u.mhat());
  }
  Matrix y(u.n(), 4);
  y.leftCols(3) = raw::exp(u.frame(), d.matrix().leftCols(3), t);
  y.col(3) = u.mhat();
  return MassManifoldPoint(StiefelPoint(std::move(y)), u.mhat());
}

LogResult log_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1, LogOptions opts,
                MassRoute route) {
  if ((u0.mhat() - u1.mhat()).cwiseAbs().maxCoeff() > kMassTol) {
    throw MassMismatch("log_M: points lie on different mass manifolds");
  }
  if (route == MassRoute::Full) return stiefel_log(u0.point(), u1.point(), opts);
  raw::Log r = raw::log(u0.frame(), u1.frame(), opts);
  return LogResult{TangentVec(u0.point(), pad_zero_column(r.tangent)), r.converged, r.iterations,
                   r.residual};
}

double approx_distance_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1) {
  return canonical_norm(log_M(u0, u1, LogOptions{1, 1e-6}).tangent);
}

double distance_M(const MassManifoldPoint& u0, const MassManifoldPoint& u1, LogOptions opts) {
  const LogResult lr = log_M(u0, u1, opts);
  if (!lr.converged) throw LogNotConverged("distance_M: logarithm did not converge");
  return canonical_norm(lr.tangent);
}

MassManifoldPoint project_to_M(const Matrix& a, const Vector& mhat) {
  Matrix f = a.leftCols(3);
  f -= mhat * (mhat.transpose() * f);
  Matrix y(a.rows(), 4);
  y.leftCols(3) = svd_polar_factor(f);
  y.col(3) = mhat;
  return MassManifoldPoint(StiefelPoint(std::move(y)), mhat);
}

}  // namespace sfm
