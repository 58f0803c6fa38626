#include "sfm/errors.hpp"
#include "sfm/numkernels.hpp"
#include "sfm/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace sfm;
using testing::eye;
using testing::max_abs;

TEST_CASE("thin_qr on orthonormal and scaled columns") {
  const Matrix a = eye(5).leftCols(2);
  QR qr = thin_qr(a);
  CHECK(max_abs(qr.Q - a) < 1e-15);
  CHECK(max_abs(qr.R - eye(2)) < 1e-15);

  qr = thin_qr(2.0 * a);
  CHECK(max_abs(qr.Q - a) < 1e-15);
  CHECK(max_abs(qr.R - 2.0 * eye(2)) < 1e-15);
}

TEST_CASE("thin_qr reconstructs a random tall matrix") {
  Rng rng(11);
  const Matrix a = randn(18, 4, rng);
  const QR qr = thin_qr(a);
  CHECK(max_abs(qr.Q * qr.R - a) < 1e-13);
  CHECK(max_abs(qr.Q.transpose() * qr.Q - eye(4)) < 1e-14);
  for (int k = 0; k < 4; ++k) CHECK(qr.R(k, k) >= 0.0);
  CHECK(max_abs(qr.R.triangularView<Eigen::StrictlyLower>().toDenseMatrix()) == 0.0);
}

TEST_CASE("full_qr_completion") {
  SUBCASE("single column in the plane") {
    Matrix a(2, 1);
    a << 1, 0;
    const Matrix o = full_qr_completion(a);
    CHECK(max_abs(o.col(0) - a) < 1e-15);
    CHECK(std::abs(std::abs(o(1, 1)) - 1.0) < 1e-15);
    CHECK(std::abs(o(0, 1)) < 1e-15);
  }
  SUBCASE("stacked M, N from a random Stiefel pair") {
    Rng rng(12);
    const Matrix u0 = haar_uniform(18, 4, rng).matrix();
    const Matrix u1 = haar_uniform(18, 4, rng).matrix();
    const Matrix m = u0.transpose() * u1;
    Matrix mn(8, 4);
    mn.topRows(4) = m;
    mn.bottomRows(4) = thin_qr(u1 - u0 * m).R;
    const Matrix o = full_qr_completion(mn);
    CHECK(max_abs(o.transpose() * o - eye(8)) < 1e-12);
    CHECK(max_abs(o.leftCols(4) - mn) < 1e-12);
    CHECK(max_abs(mn.transpose() * o.rightCols(4)) < 1e-12);
  }
}

TEST_CASE("matrix_exp_small closed forms") {
  CHECK(max_abs(matrix_exp_small(Matrix::Zero(4, 4)) - eye(4)) == 0.0);
  const double th = std::acos(-1.0) / 2.0;
  Matrix a(2, 2);
  a << 0, -th, th, 0;
  Matrix want(2, 2);
  want << 0, -1, 1, 0;
  CHECK(max_abs(matrix_exp_small(a) - want) < 1e-15);
}

TEST_CASE("matrix_exp_small agrees with a 60-term power series") {
  Rng rng(13);
  for (double scale : {0.1, 0.5, 1.0}) {
    const Matrix a = testing::random_skew(8, rng, scale);
    Matrix term = eye(8), sum = eye(8);
    for (int k = 1; k <= 60; ++k) {
      term = (term * a / static_cast<double>(k)).eval();
      sum += term;
    }
    CHECK(max_abs(matrix_exp_small(a) - sum) < 1e-12);
  }
}

TEST_CASE("matrix_log_so") {
  CHECK(max_abs(matrix_log_so(eye(6))) < 1e-15);

  Matrix v = eye(8);
  v(2, 2) = std::cos(0.3);
  v(2, 3) = -std::sin(0.3);
  v(3, 2) = std::sin(0.3);
  v(3, 3) = std::cos(0.3);
  Matrix want = Matrix::Zero(8, 8);
  want(2, 3) = -0.3;
  want(3, 2) = 0.3;
  CHECK(max_abs(matrix_log_so(v) - want) < 1e-14);

  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix s = testing::random_skew(8, rng);
    s *= 1.9 * std::uniform_real_distribution<double>(0.05, 1.0)(rng) / s.norm();
    CHECK(max_abs(matrix_log_so(matrix_exp_small(s)) - s) < 1e-12);
  }
}

TEST_CASE("matrix_log_so rejects a half-turn") {
  Matrix v = eye(4);
  v(0, 0) = -1.0;
  v(1, 1) = -1.0;
  CHECK_THROWS_AS(matrix_log_so(v), NearPiRotation);
}

TEST_CASE("sylvester_sym") {
  Rng rng(15);
  const Matrix c = randn(4, 4, rng);
  CHECK(max_abs(sylvester_sym(-0.5 * eye(4), c) + c) < 1e-14);

  Matrix s(2, 2), c2(2, 2), want(2, 2);
  s << 1, 0, 0, 2;
  c2 << 2, 3, 3, 8;
  want << 1, 1, 1, 2;
  CHECK(max_abs(sylvester_sym(s, c2) - want) < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = haar_uniform(4, 4, rng).matrix();
    Vector lam(4);
    for (int k = 0; k < 4; ++k) lam(k) = std::uniform_real_distribution<double>(-0.5, -0.4)(rng);
    const Matrix sr = q * lam.asDiagonal() * q.transpose();
    const Matrix cr = randn(4, 4, rng);
    const Matrix g = sylvester_sym(sr, cr);
    CHECK(max_abs(sr * g + g * sr - cr) < 1e-10);
  }

  Matrix singular(2, 2);
  singular << 1, 0, 0, -1;
  CHECK_THROWS_AS(sylvester_sym(singular, c2), SingularSylvester);
}

TEST_CASE("spd_inverse_sqrt") {
  CHECK(max_abs(spd_inverse_sqrt(4.0 * eye(3)) - 0.5 * eye(3)) < 1e-15);
  const Vector d = (Vector(4) << 1, 4, 9, 16).finished();
  const Vector w = (Vector(4) << 1, 0.5, 1.0 / 3.0, 0.25).finished();
  CHECK(max_abs(spd_inverse_sqrt(d.asDiagonal().toDenseMatrix()) - w.asDiagonal().toDenseMatrix()) < 1e-15);

  Rng rng(16);
  const Matrix a = randn(6, 5, rng);
  const Matrix g = a.transpose() * a + eye(5);
  const Matrix h = spd_inverse_sqrt(g);
  CHECK(max_abs(h * g * h - eye(5)) < 1e-12);

  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(spd_inverse_sqrt(sing), NotSPD);
}

TEST_CASE("svd_polar_factor") {
  Rng rng(17);
  const Matrix u = haar_uniform(9, 3, rng).matrix();
  CHECK(max_abs(svd_polar_factor(u) - u) < 1e-14);
  CHECK(max_abs(svd_polar_factor(3.0 * u) - u) < 1e-14);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Matrix noise = Matrix::NullaryExpr(9, 3, [&] { return unit(rng); });
  const Matrix near = svd_polar_factor(u + 1e-3 * noise);
  CHECK(max_abs(near.transpose() * near - eye(3)) < 1e-12);
  CHECK(max_abs(near - u) < 2e-3);

  Matrix flat = Matrix::Zero(4, 2);
  flat(0, 0) = 1.0;
  CHECK_THROWS_AS(svd_polar_factor(flat), RankDeficient);
}

TEST_CASE("linear_assignment small patterns") {
  Matrix c(3, 3);
  c << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  CHECK(linear_assignment(c) == std::vector<int>{0, 1, 2});
  CHECK(assignment_cost(c, linear_assignment(c)) == 0.0);

  Matrix d(4, 4);
  d << 5, 0, 7, 3,
       2, 9, 9, 0,
       0, 4, 6, 8,
       6, 7, 0, 5;
  CHECK(linear_assignment(d) == std::vector<int>{1, 3, 0, 2});
}

TEST_CASE("linear_assignment matches brute force over 5040 permutations") {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix c = randn(7, 7, rng).cwiseAbs();
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, assignment_cost(c, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(std::abs(assignment_cost(c, linear_assignment(c)) - best) < 1e-12);
  }
}
