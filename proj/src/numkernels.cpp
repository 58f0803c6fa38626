#include "sfm/numkernels.hpp"

#include "sfm/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sfm {

QR thin_qr(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  if (n < p) throw InvalidArgument("thin_qr: requires rows >= cols");

  Eigen::HouseholderQR<Matrix> qr(a);
  QR out;
  out.Q = qr.householderQ() * Matrix::Identity(n, p);
  out.R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (out.R(i, i) < 0.0) {
      out.R.row(i) *= -1.0;
      out.Q.col(i) *= -1.0;
    }
  }
  return out;
}

Matrix full_qr_completion(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index p = a.cols();
  if (m < p) throw InvalidArgument("full_qr_completion: requires rows >= cols");

  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix o = qr.householderQ();
  const Matrix& packed = qr.matrixQR();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (packed(i, i) < 0.0) o.col(i) *= -1.0;
  }
  return o;
}

namespace {

double norm1(const Matrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

Matrix matrix_exp_small(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("matrix_exp_small: square input required");
  const Eigen::Index k = a.rows();
  if (k == 0) return a;
  if (a.isZero(0.0)) return Matrix::Identity(k, k);

  // Degree-13 Padé coefficients and the theta_13 bound.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  int squarings = 0;
  const double nrm = norm1(a);
  if (nrm > theta13) squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  const Matrix as = a / std::ldexp(1.0, squarings);

  const Matrix id = Matrix::Identity(k, k);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * id;
  const Matrix u = as * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * id;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = (r * r).eval();
  return r;
}

Matrix matrix_log_so(const Matrix& v) {
  if (v.rows() != v.cols()) throw InvalidArgument("matrix_log_so: square input required");
  const Eigen::Index k = v.rows();
  constexpr double max_angle = std::numbers::pi - 1e-6;

  Eigen::RealSchur<Matrix> schur(v);
  const Matrix& t = schur.matrixT();
  const Matrix& z = schur.matrixU();

  Matrix log_t = Matrix::Zero(k, k);
  Eigen::Index i = 0;
  while (i < k) {
    if (i + 1 < k && t(i + 1, i) != 0.0) {
      const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double s = 0.5 * (t(i + 1, i) - t(i, i + 1));
      const double theta = std::atan2(s, c);
      if (std::abs(theta) > max_angle) {
        throw NearPiRotation("matrix_log_so: rotation angle " + std::to_string(theta) +
                             " too close to pi");
      }
      log_t(i, i + 1) = -theta;
      log_t(i + 1, i) = theta;
      i += 2;
    } else {
      if (t(i, i) < 0.0) {
        throw NearPiRotation("matrix_log_so: eigenvalue -1 has no principal logarithm");
      }
      i += 1;
    }
  }
  return skew(z * log_t * z.transpose());
}

Matrix sylvester_sym(const Matrix& s, const Matrix& c) {
  if (s.rows() != s.cols() || c.rows() != s.rows() || c.cols() != s.cols()) {
    throw InvalidArgument("sylvester_sym: shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(s));
  const Vector& lambda = eig.eigenvalues();
  const Matrix& w = eig.eigenvectors();

  Matrix g = w.transpose() * c * w;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double denom = lambda(i) + lambda(j);
      if (std::abs(denom) <= 1e-10) {
        throw SingularSylvester("sylvester_sym: eigenvalue pair sum " + std::to_string(denom));
      }
      g(i, j) /= denom;
    }
  }
  return w * g * w.transpose();
}

Matrix spd_inverse_sqrt(const Matrix& g) {
  if (g.rows() != g.cols()) throw InvalidArgument("spd_inverse_sqrt: square input required");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(g));
  const Vector& lambda = eig.eigenvalues();
  const double largest = lambda.maxCoeff();
  const double smallest = lambda.minCoeff();
  if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
    throw NotSPD("spd_inverse_sqrt: matrix is not positive definite");
  }
  const Matrix& w = eig.eigenvectors();
  return w * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * w.transpose();
}

Matrix svd_polar_factor(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  if (sigma.size() == 0 || !(sigma(0) > 0.0) ||
      sigma(sigma.size() - 1) <= 1e-12 * sigma(0)) {
    throw RankDeficient("svd_polar_factor: input is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<int> linear_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw InvalidArgument("linear_assignment: square cost required");
  const int k = static_cast<int>(cost.rows());
  if (k == 0) return {};

  // Shortest augmenting path with row/column potentials (Kuhn-Munkres, 1-based).
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> match_col(k + 1, 0), way(k + 1, 0);
  for (int row = 1; row <= k; ++row) {
    match_col[0] = row;
    int j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match_col[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const int j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> perm(k, -1);
  for (int j = 1; j <= k; ++j) perm[match_col[j] - 1] = j - 1;
  return perm;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += cost(static_cast<Eigen::Index>(i), perm[i]);
  return total;
}

double orthogonality_drift(const Matrix& a) {
  return (a.transpose() * a - Matrix::Identity(a.cols(), a.cols())).norm();
}

}  // namespace sfm
