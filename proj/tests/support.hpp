#pragma once

#include "sfm/massmanifold.hpp"
#include "sfm/molecule.hpp"
#include "sfm/stiefel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace testing {

using sfm::Matrix;
using sfm::Vector;

inline double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline Matrix eye(Eigen::Index n) { return Matrix::Identity(n, n); }

inline Matrix random_skew(Eigen::Index n, sfm::Rng& rng, double scale = 1.0) {
  const Matrix z = sfm::randn(n, n, rng);
  return scale * (z - z.transpose()) / 2.0;
}

inline sfm::TangentVec random_tangent(const sfm::StiefelPoint& u, double radius, sfm::Rng& rng) {
  const sfm::TangentVec raw = sfm::project_to_tangent(u, sfm::randn(u.n(), u.p(), rng));
  return raw.scaled(radius / sfm::canonical_norm(raw));
}

inline sfm::TangentVec random_tangent_M(const sfm::MassManifoldPoint& u, double radius, sfm::Rng& rng) {
  const sfm::TangentVec raw = sfm::tangent_project_M(u, sfm::randn(u.n(), 3, rng));
  return raw.scaled(radius / sfm::canonical_norm(raw));
}

// Six unit-mass atoms on the axes at +-2, +-1.5, +-1.
inline sfm::Molecule symmetric_six() {
  sfm::Molecule mol;
  mol.elements.assign(6, "X");
  mol.masses.assign(6, 1.0);
  mol.coords.resize(6, 3);
  mol.coords << 2, 0, 0, -2, 0, 0, 0, 1.5, 0, 0, -1.5, 0, 0, 0, 1, 0, 0, -1;
  return mol;
}

inline Matrix rotation_from(sfm::Rng& rng) {
  Matrix q = sfm::haar_uniform(3, 3, rng).matrix();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Minimum RMSD over every same-type permutation under every axis reflection.
inline double exhaustive_rmsd(const sfm::Molecule& ref, const sfm::Molecule& cand) {
  const Eigen::Index n = ref.size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 8; ++code) {
    Matrix b = cand.coords;
    for (int c = 0; c < 3; ++c)
      if (code & (4 >> c)) b.col(c) = -b.col(c);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    do {
      bool valid = true;
      for (std::size_t i = 0; i < perm.size() && valid; ++i)
        valid = ref.elements[i] == cand.elements[static_cast<std::size_t>(perm[i])];
      if (!valid) continue;
      double sq = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        sq += (ref.coords.row(i) - b.row(perm[static_cast<std::size_t>(i)])).squaredNorm();
      best = std::min(best, std::sqrt(sq / static_cast<double>(n)));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

}  // namespace testing
