#pragma once

// XYZ files: atom count, a comment line (optionally carrying
// `moments=Px,Py,Pz`), then one `El x y z` line per atom in Angstrom.

#include "sfm/molecule.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace sfm {

struct XyzRecord {
  Molecule molecule;
  std::string comment;
  std::optional<std::array<double, 3>> moments;
};

/// Throws ParseError on malformed input or unknown elements.
XyzRecord parse_xyz(const std::string& text);
XyzRecord read_xyz(const std::filesystem::path& path);

/// Coordinates are written with 12 significant digits.
std::string format_xyz(const Molecule& mol, const std::string& comment = "");
void write_xyz(const std::filesystem::path& path, const Molecule& mol,
               const std::string& comment = "");

std::string moments_comment(const PlanarMoments& moments);

}  // namespace sfm
