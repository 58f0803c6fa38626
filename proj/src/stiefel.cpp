#include "sfm/stiefel.hpp"

#include "sfm/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace sfm {

namespace {

constexpr double kPointTol = 1e-10;
constexpr double kTangentTol = 1e-10;
constexpr double kReorthTol = 1e-12;

bool same_base(const StiefelPoint& a, const StiefelPoint& b) {
  if (a.n() != b.n() || a.p() != b.p()) return false;
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace

StiefelPoint::StiefelPoint(Matrix u) : u_(std::move(u)) {
  if (u_.cols() < 1 || u_.rows() < u_.cols()) {
    throw InvalidArgument("StiefelPoint: requires n >= p >= 1");
  }
  const double drift = orthogonality_drift(u_);
  if (!(drift < kPointTol)) {
    throw InvalidArgument("StiefelPoint: columns not orthonormal (drift " + std::to_string(drift) +
                          ")");
  }
}

TangentVec::TangentVec(StiefelPoint base, Matrix d) : base_(std::move(base)), d_(std::move(d)) {
  if (d_.rows() != base_.n() || d_.cols() != base_.p()) {
    throw InvalidArgument("TangentVec: shape does not match base point");
  }
  const Matrix utd = base_.matrix().transpose() * d_;
  const double scale = std::max(1.0, d_.norm());
  if (!((utd + utd.transpose()).norm() <= kTangentTol * scale)) {
    throw InvalidArgument("TangentVec: U^T D is not skew-symmetric");
  }
}

TangentVec TangentVec::zero(const StiefelPoint& base) {
  return TangentVec(base, Matrix::Zero(base.n(), base.p()));
}

TangentVec TangentVec::scaled(double s) const { return TangentVec(base_, s * d_); }

double canonical_norm_sq(const Matrix& u, const Matrix& d) {
  return d.squaredNorm() - 0.5 * (u.transpose() * d).squaredNorm();
}

double canonical_inner(const TangentVec& a, const TangentVec& b) {
  if (!same_base(a.base(), b.base())) throw BaseMismatch("canonical_inner: different base points");
  const Matrix& u = a.base().matrix();
  const Matrix uta = u.transpose() * a.matrix();
  const Matrix utb = u.transpose() * b.matrix();
  return (a.matrix().transpose() * b.matrix()).trace() - 0.5 * (uta.transpose() * utb).trace();
}

double canonical_norm(const TangentVec& d) {
  return std::sqrt(std::max(0.0, canonical_norm_sq(d.base().matrix(), d.matrix())));
}

namespace raw {

Matrix exp(const Matrix& u, const Matrix& d, double t) {
  const Eigen::Index p = u.cols();
  const Matrix utd = u.transpose() * d;
  const QR qr = thin_qr(d - u * utd);

  Matrix a = Matrix::Zero(2 * p, 2 * p);
  a.topLeftCorner(p, p) = utd;
  a.topRightCorner(p, p) = -qr.R.transpose();
  a.bottomLeftCorner(p, p) = qr.R;

  const Matrix e = matrix_exp_small(t * a);
  Matrix y = u * e.topLeftCorner(p, p) + qr.Q * e.bottomLeftCorner(p, p);
  if (orthogonality_drift(y) > kReorthTol) y = svd_polar_factor(y);
  return y;
}

Log log(const Matrix& u0, const Matrix& u1, LogOptions opts) {
  if (u0.rows() != u1.rows() || u0.cols() != u1.cols()) {
    throw InvalidArgument("stiefel_log: shape mismatch");
  }
  if (opts.max_iter < 1) throw InvalidArgument("stiefel_log: max_iter must be >= 1");
  const Eigen::Index p = u0.cols();

  const Matrix m = u0.transpose() * u1;
  const QR qn = thin_qr(u1 - u0 * m);

  Matrix mn(2 * p, p);
  mn.topRows(p) = m;
  mn.bottomRows(p) = qn.R;

  Matrix v(2 * p, 2 * p);
  v.leftCols(p) = mn;
  v.rightCols(p) = full_qr_completion(mn).rightCols(p);
  if (v.determinant() < 0.0) {
    // flip the completion column that keeps V nearest the identity
    Eigen::Index flip = p;
    for (Eigen::Index j = p + 1; j < 2 * p; ++j)
      if (v(j, j) < v(flip, flip)) flip = j;
    v.col(flip) *= -1.0;
  }

  Log out;
  Matrix best_a, best_b;
  double best_res = std::numeric_limits<double>::infinity();
  try {
    for (int k = 1; k <= opts.max_iter; ++k) {
      const Matrix l = matrix_log_so(v);
      const Matrix c = l.bottomRightCorner(p, p);
      const double res = c.norm();
      out.iterations = k;
      if (res < best_res) {
        best_res = res;
        best_a = l.topLeftCorner(p, p);
        best_b = l.bottomLeftCorner(p, p);
      }
      if (res <= opts.tol) {
        out.converged = true;
        break;
      }
      if (k == opts.max_iter) break;

      const Matrix b = l.bottomLeftCorner(p, p);
      const Matrix s = b * b.transpose() / 12.0 - 0.5 * Matrix::Identity(p, p);
      const Matrix gamma = sylvester_sym(s, c);
      v.rightCols(p) = (v.rightCols(p) * matrix_exp_small(gamma)).eval();
    }
  } catch (const NearPiRotation& e) {
    throw NonPrincipal(std::string("stiefel_log: ") + e.what());
  } catch (const SingularSylvester& e) {
    throw NonPrincipal(std::string("stiefel_log: ") + e.what());
  }

  out.residual = best_res;
  out.tangent = u0 * best_a + qn.Q * best_b;
  return out;
}

}  // namespace raw

StiefelPoint stiefel_exp(const StiefelPoint& u, const TangentVec& d, double t) {
  if (!same_base(u, d.base())) throw BaseMismatch("stiefel_exp: tangent is not based at U");
  return StiefelPoint(raw::exp(u.matrix(), d.matrix(), t));
}

LogResult stiefel_log(const StiefelPoint& u0, const StiefelPoint& u1, LogOptions opts) {
  raw::Log r = raw::log(u0.matrix(), u1.matrix(), opts);
  return LogResult{TangentVec(u0, std::move(r.tangent)), r.converged, r.iterations, r.residual};
}

StiefelPoint geodesic_interpolate(const StiefelPoint& u0, const StiefelPoint& u1, double t,
                                  LogOptions opts) {
  if (t < 0.0 || t > 1.0) throw InvalidArgument("geodesic_interpolate: t outside [0, 1]");
  const LogResult lr = stiefel_log(u0, u1, opts);
  if (!lr.converged) throw LogNotConverged("geodesic_interpolate: logarithm did not converge");
  if (t == 0.0) return u0;
  return stiefel_exp(u0, lr.tangent, t);
}

StiefelPoint haar_uniform(Eigen::Index n, Eigen::Index p, Rng& rng) {
  if (n < p || p < 1) throw InvalidArgument("haar_uniform: requires n >= p >= 1");
  for (;;) {
    const Matrix z = randn(n, p, rng);
    try {
      return StiefelPoint(z * spd_inverse_sqrt(z.transpose() * z));
    } catch (const NotSPD&) {
      // measure-zero event; draw again
    }
  }
}

StiefelPoint project_to_manifold(const Matrix& a) { return StiefelPoint(svd_polar_factor(a)); }

TangentVec project_to_tangent(const StiefelPoint& u, const Matrix& z) {
  const Matrix& um = u.matrix();
  return TangentVec(u, z - um * sym(um.transpose() * z));
}

double approx_distance(const StiefelPoint& u0, const StiefelPoint& u1) {
  const LogResult lr = stiefel_log(u0, u1, LogOptions{1, 1e-6});
  return canonical_norm(lr.tangent);
}

double distance(const StiefelPoint& u0, const StiefelPoint& u1, LogOptions opts) {
  const LogResult lr = stiefel_log(u0, u1, opts);
  if (!lr.converged) throw LogNotConverged("distance: logarithm did not converge");
  return canonical_norm(lr.tangent);
}

}  // namespace sfm
