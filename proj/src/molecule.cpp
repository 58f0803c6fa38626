#include "sfm/molecule.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace sfm {

std::optional<double> isotope_mass(std::string_view element) {
  static const std::unordered_map<std::string_view, double> table = {
      {"H", 1.00782503207}, {"C", 12.0},          {"N", 14.0030740048}, {"O", 15.99491461956},
      {"F", 18.99840322},   {"Si", 27.9769265325}, {"P", 30.97376163},   {"S", 31.97207100},
      {"Cl", 34.96885268},  {"Br", 78.9183371},    {"I", 126.904473},
  };
  const auto it = table.find(element);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

void Molecule::validate() const {
  const auto n = static_cast<std::size_t>(coords.rows());
  if (coords.cols() != 3) throw InvalidArgument("Molecule: coordinates must be n x 3");
  if (elements.size() != n || masses.size() != n) {
    throw InvalidArgument("Molecule: elements, masses and coordinates differ in length");
  }
  if (n < 5) throw InvalidArgument("Molecule: at least 5 atoms required");
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("Molecule: masses must be positive");
  }
  if (!coords.allFinite()) throw InvalidArgument("Molecule: coordinates must be finite");
}

Molecule Molecule::from_elements(std::vector<std::string> elements, Matrix coords) {
  Molecule mol;
  mol.masses.reserve(elements.size());
  for (const auto& el : elements) {
    const auto m = isotope_mass(el);
    if (!m) throw InvalidArgument("unsupported element '" + el + "'");
    mol.masses.push_back(*m);
  }
  mol.elements = std::move(elements);
  mol.coords = std::move(coords);
  mol.validate();
  return mol;
}

PlanarMoments PlanarMoments::principal(double px, double py, double pz) {
  PlanarMoments pm;
  pm.P = Eigen::Vector3d(px, py, pz).asDiagonal();
  pm.px = px;
  pm.py = py;
  pm.pz = pz;
  return pm;
}

std::string_view to_string(RotorClass c) {
  switch (c) {
    case RotorClass::Asymmetric: return "Asymmetric";
    case RotorClass::SymmetricTop: return "SymmetricTop";
    case RotorClass::Planar: return "Planar";
    case RotorClass::Linear: return "Linear";
  }
  return "Unknown";
}

DegenerateRotor::DegenerateRotor(RotorClass cls)
    : Error("DegenerateRotor(" + std::string(to_string(cls)) + ")"), cls_(cls) {}

namespace {

Vector mass_vec(const std::vector<double>& masses) {
  return Eigen::Map<const Vector>(masses.data(), static_cast<Eigen::Index>(masses.size()));
}

Matrix centered(const Molecule& mol) {
  return mol.coords.rowwise() - center_of_mass(mol).transpose();
}

Matrix dyadic_of(const Matrix& x, const Vector& m) {
  return x.transpose() * m.asDiagonal() * x;
}

}  // namespace

Vector center_of_mass(const Molecule& mol) {
  const Vector m = mass_vec(mol.masses);
  return mol.coords.transpose() * m / m.sum();
}

PlanarMoments planar_dyadic(const Molecule& mol) {
  const Vector m = mass_vec(mol.masses);
  PlanarMoments pm;
  pm.P = sym(dyadic_of(centered(mol), m));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(pm.P, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();  // ascending
  pm.px = std::max(0.0, ev(2));
  pm.py = std::max(0.0, ev(1));
  pm.pz = std::max(0.0, ev(0));
  return pm;
}

RotorClass rotor_class(const PlanarMoments& moments) {
  const double px = moments.px;
  if (!(px > 0.0)) return RotorClass::Linear;
  if (moments.py / px < kRotorTau) return RotorClass::Linear;
  if (moments.pz / px < kRotorTau) return RotorClass::Planar;
  const double gap_xy = (moments.px - moments.py) / moments.px;
  const double gap_yz = (moments.py - moments.pz) / moments.py;
  if (gap_xy < kRotorTau || gap_yz < kRotorTau) return RotorClass::SymmetricTop;
  return RotorClass::Asymmetric;
}

Canonical canonicalize(const Molecule& mol) {
  mol.validate();
  const Vector m = mass_vec(mol.masses);
  const Matrix xc = centered(mol);
  const Matrix p = sym(dyadic_of(xc, m));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
  PlanarMoments pm;
  pm.px = std::max(0.0, eig.eigenvalues()(2));
  pm.py = std::max(0.0, eig.eigenvalues()(1));
  pm.pz = std::max(0.0, eig.eigenvalues()(0));
  const RotorClass cls = rotor_class(pm);
  if (cls != RotorClass::Asymmetric) throw DegenerateRotor(cls);

  Matrix w(3, 3);
  for (int k = 0; k < 3; ++k) {
    Vector axis = eig.eigenvectors().col(2 - k);
    const double big = axis.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis(i)) > 1e-12 * big) {
        if (axis(i) < 0.0) axis = -axis;
        break;
      }
    }
    w.col(k) = axis;
  }

  Canonical out;
  out.molecule = mol;
  out.molecule.coords = xc * w;
  out.moments = PlanarMoments::principal(pm.px, pm.py, pm.pz);
  return out;
}

Vector unit_mass_vector(const std::vector<double>& masses) {
  const Vector m = mass_vec(masses);
  return (m / m.sum()).cwiseSqrt();
}

Matrix encode(const Molecule& mol, const PlanarMoments& moments) {
  const Eigen::Index n = mol.size();
  const Vector m = mass_vec(mol.masses);
  const double total = m.sum();
  const double scale[3] = {moments.px, moments.py, moments.pz};
  Matrix u(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) u(i, k) = std::sqrt(m(i) / scale[k]) * mol.coords(i, k);
    u(i, 3) = std::sqrt(m(i) / total);
  }
  return u;
}

Embedding embed(const Molecule& mol) {
  mol.validate();
  const Vector m = mass_vec(mol.masses);
  Molecule centered_mol = mol;
  centered_mol.coords = centered(mol);
  const Matrix p = sym(dyadic_of(centered_mol.coords, m));

  const PlanarMoments pm = PlanarMoments::principal(p(0, 0), p(1, 1), p(2, 2));
  const RotorClass cls = rotor_class(planar_dyadic(mol));
  if (cls != RotorClass::Asymmetric) throw DegenerateRotor(cls);
  const double off = std::max({std::abs(p(0, 1)), std::abs(p(0, 2)), std::abs(p(1, 2))});
  if (off > 1e-8 * pm.px || !(pm.px >= pm.py && pm.py >= pm.pz)) {
    throw InvalidArgument("embed: molecule is not in its principal axis system");
  }

  const Vector mhat = unit_mass_vector(mol.masses);
  Matrix u = encode(centered_mol, pm);
  u.col(3) = mhat;
  return Embedding{MassManifoldPoint(StiefelPoint(std::move(u)), mhat), pm};
}

Molecule unembed(const Matrix& u, const std::vector<std::string>& elements,
                 const std::vector<double>& masses, const PlanarMoments& moments) {
  const auto n = static_cast<Eigen::Index>(masses.size());
  if (u.rows() != n || u.cols() != 4) throw InvalidArgument("unembed: U must be n x 4");
  const Vector mhat = unit_mass_vector(masses);
  if (mass_column_deviation(u, mhat) > 1e-8) {
    throw MassMismatch("unembed: last column of U is not the unit mass vector");
  }
  const double scale[3] = {moments.px, moments.py, moments.pz};
  Molecule mol;
  mol.elements = elements;
  mol.masses = masses;
  mol.coords.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      mol.coords(i, k) = std::sqrt(scale[k] / masses[static_cast<std::size_t>(i)]) * u(i, k);
    }
  }
  return mol;
}

Molecule unembed(const MassManifoldPoint& u, const std::vector<std::string>& elements,
                 const std::vector<double>& masses, const PlanarMoments& moments) {
  return unembed(u.matrix(), elements, masses, moments);
}

double moment_error(const Molecule& mol, const PlanarMoments& target) {
  const Matrix p_hat = dyadic_of(centered(mol), mass_vec(mol.masses));
  const Matrix diff = p_hat - PlanarMoments::principal(target.px, target.py, target.pz).P;
  double sq = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) sq += diff(i, j) * diff(i, j);
  return std::sqrt(sq) / std::sqrt(6.0);
}

std::array<double, 9> constraint_residuals(const Molecule& mol, const PlanarMoments& target) {
  const Vector m = mass_vec(mol.masses);
  const Matrix& x = mol.coords;
  const Matrix p = dyadic_of(x, m);
  const Vector sums = x.transpose() * m;
  return {p(0, 0) - target.px, p(1, 1) - target.py, p(2, 2) - target.pz,
          p(1, 2),             p(0, 2),             p(0, 1),
          sums(0),             sums(1),             sums(2)};
}

std::array<double, 9> relative_constraint_residuals(const Molecule& mol,
                                                    const PlanarMoments& target) {
  auto r = constraint_residuals(mol, target);
  const double total = mass_vec(mol.masses).sum();
  const double com_scale = total * std::sqrt(target.px / total);
  for (int k = 0; k < 6; ++k) r[k] /= target.px;
  for (int k = 6; k < 9; ++k) r[k] /= com_scale;
  return r;
}

std::vector<std::string> synthetic_formula(int n) {
  static const std::array<std::pair<const char*, int>, 4> parts = {
      {{"C", 9}, {"H", 11}, {"N", 1}, {"O", 2}}};
  constexpr int total = 23;
  std::array<int, 4> counts{};
  std::array<double, 4> remainder{};
  int assigned = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double exact = static_cast<double>(n) * parts[k].second / total;
    counts[k] = static_cast<int>(std::floor(exact));
    remainder[k] = exact - counts[k];
    assigned += counts[k];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++counts[order[static_cast<std::size_t>(k) % 4]];

  std::vector<std::string> elements;
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (int c = 0; c < counts[k]; ++c) elements.emplace_back(parts[k].first);
  return elements;
}

Molecule synthetic_molecule(int n, Rng& rng, double spread) {
  if (n < 5) throw InvalidArgument("synthetic_molecule: n must be >= 5");
  std::vector<std::string> elements = synthetic_formula(n);
  for (;;) {
    Matrix coords = spread * randn(n, 3, rng);
    Molecule mol = Molecule::from_elements(elements, std::move(coords));
    try {
      return canonicalize(mol).molecule;
    } catch (const DegenerateRotor&) {
      // probability zero for Gaussian coordinates; draw again
    }
  }
}

}  // namespace sfm
