#pragma once

// Molecular point clouds, planar moments, principal-axis canonicalization and
// the bijection between canonical molecules and the mass manifold M.

#include "sfm/errors.hpp"
#include "sfm/massmanifold.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfm {

/// Most-abundant-isotope mass in amu, or nullopt for an unsupported element.
std::optional<double> isotope_mass(std::string_view element);

struct Molecule {
  std::vector<std::string> elements;
  std::vector<double> masses;  // amu
  Matrix coords;               // n x 3, Angstrom

  Eigen::Index size() const { return coords.rows(); }

  /// n >= 5, positive masses, finite coordinates, consistent lengths.
  void validate() const;

  /// Builds a molecule with masses looked up from the isotope table.
  static Molecule from_elements(std::vector<std::string> elements, Matrix coords);
};

struct PlanarMoments {
  Matrix P = Matrix::Zero(3, 3);  // planar dyadic, amu * A^2
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;

  /// Diagonal dyadic for moments already expressed in their principal axes.
  static PlanarMoments principal(double px, double py, double pz);
  std::array<double, 3> values() const { return {px, py, pz}; }
};

enum class RotorClass { Asymmetric, SymmetricTop, Planar, Linear };

std::string_view to_string(RotorClass c);

class DegenerateRotor : public Error {
 public:
  explicit DegenerateRotor(RotorClass cls);
  RotorClass rotor() const { return cls_; }

 private:
  RotorClass cls_;
};

/// Relative threshold on normalized moments below which a rotor is degenerate.
inline constexpr double kRotorTau = 1e-8;

Vector center_of_mass(const Molecule& mol);

/// P = X^T diag(m) X about the center of mass, eigenvalues in descending order.
PlanarMoments planar_dyadic(const Molecule& mol);

RotorClass rotor_class(const PlanarMoments& moments);

struct Canonical {
  Molecule molecule;
  PlanarMoments moments;
};

/// Translates to the center of mass and rotates into the principal axes with
/// descending moments. Eigenvector signs make the first nonzero component
/// positive. Throws DegenerateRotor unless the rotor is asymmetric.
Canonical canonicalize(const Molecule& mol);

/// Unit mass vector sqrt(m / M).
Vector unit_mass_vector(const std::vector<double>& masses);

struct Embedding {
  MassManifoldPoint point;
  PlanarMoments moments;
};

/// U = (sqrt(m_i/P_X) x_i, sqrt(m_i/P_Y) y_i, sqrt(m_i/P_Z) z_i, sqrt(m_i/M)).
/// Requires a canonical asymmetric-rotor molecule.
Embedding embed(const Molecule& mol);

/// Row/column scaling with prescribed moments and no canonical check. The
/// result need not lie on the manifold; used to re-encode decoded states.
Matrix encode(const Molecule& mol, const PlanarMoments& moments);

/// Inverse of embed. Throws MassMismatch if the last column differs from
/// sqrt(m / M) by more than 1e-8.
Molecule unembed(const Matrix& u, const std::vector<std::string>& elements,
                 const std::vector<double>& masses, const PlanarMoments& moments);
Molecule unembed(const MassManifoldPoint& u, const std::vector<std::string>& elements,
                 const std::vector<double>& masses, const PlanarMoments& moments);

/// (1/sqrt 6) ||triu(P_hat - diag(P_X, P_Y, P_Z))||_2 with P_hat the dyadic of
/// the candidate in its stored axes about its center of mass.
double moment_error(const Molecule& mol, const PlanarMoments& target);

/// The nine principal-axis constraints in order: three diagonal moments minus
/// targets, products yz, xz, xy, then mass-weighted coordinate sums x, y, z.
std::array<double, 9> constraint_residuals(const Molecule& mol, const PlanarMoments& target);

/// Residuals scaled to be dimensionless: moments and products by P_X, center
/// of mass sums by M * sqrt(P_X / M).
std::array<double, 9> relative_constraint_residuals(const Molecule& mol,
                                                    const PlanarMoments& target);

/// Random canonical molecule with QM9-like C:H:N:O = 9:11:1:2 composition
/// and Gaussian coordinates of scale `spread` Angstrom.
Molecule synthetic_molecule(int n, Rng& rng, double spread = 1.5);

/// Element counts for the synthetic composition at size n (largest remainder).
std::vector<std::string> synthetic_formula(int n);

}  // namespace sfm
