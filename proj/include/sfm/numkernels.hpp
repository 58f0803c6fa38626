#pragma once

// Small dense kernels used by the manifold algorithms. All functions are pure
// and safe to call concurrently.

#include <Eigen/Dense>

#include <vector>

namespace sfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct QR {
  Matrix Q;
  Matrix R;
};

/// Thin Householder QR of an n x p matrix (n >= p). The diagonal of R is made
/// nonnegative by flipping the matching columns of Q. Rank-deficient input is
/// allowed: Q stays column-orthonormal.
QR thin_qr(const Matrix& a);

/// Full 2p x 2p orthogonal matrix whose first p columns span the columns of an
/// orthonormal 2p x p input.
Matrix full_qr_completion(const Matrix& a);

/// Principal matrix exponential, Pade degree 13 with scaling and squaring.
Matrix matrix_exp_small(const Matrix& a);

/// Principal logarithm of a special orthogonal matrix through the real Schur
/// form. Throws NearPiRotation if a rotation angle exceeds pi - 1e-6.
Matrix matrix_log_so(const Matrix& v);

/// Solves S*G + G*S = C for symmetric S via its eigendecomposition.
/// Throws SingularSylvester if |lambda_i + lambda_j| <= 1e-10 for some pair.
Matrix sylvester_sym(const Matrix& s, const Matrix& c);

/// Symmetric H with H*G*H = I for symmetric positive definite G.
/// Throws NotSPD if the smallest eigenvalue is <= 1e-12 * largest.
Matrix spd_inverse_sqrt(const Matrix& g);

/// Nearest column-orthonormal matrix in Frobenius norm (polar factor).
/// Throws RankDeficient if sigma_min <= 1e-12 * sigma_max.
Matrix svd_polar_factor(const Matrix& a);

/// Exact minimum-cost assignment for a square cost matrix. Entry i of the
/// result is the column assigned to row i.
std::vector<int> linear_assignment(const Matrix& cost);

/// Total cost of an assignment.
double assignment_cost(const Matrix& cost, const std::vector<int>& perm);

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }
inline Matrix skew(const Matrix& a) { return 0.5 * (a - a.transpose()); }

/// ||A^T A - I||_F.
double orthogonality_drift(const Matrix& a);

}  // namespace sfm
