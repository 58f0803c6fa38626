#include "sfm/xyz.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace sfm {

namespace {

std::optional<std::array<double, 3>> parse_moments_key(const std::string& comment) {
  const auto pos = comment.find("moments=");
  if (pos == std::string::npos) return std::nullopt;
  std::string value = comment.substr(pos + 8);
  value = value.substr(0, value.find_first_of(" \t"));
  std::array<double, 3> out{};
  std::istringstream in(value);
  for (int k = 0; k < 3; ++k) {
    std::string item;
    if (!std::getline(in, item, ',')) throw ParseError("xyz: moments= needs three values");
    try {
      std::size_t used = 0;
      out[static_cast<std::size_t>(k)] = std::stod(item, &used);
      if (used != item.size()) throw ParseError("xyz: bad moments value '" + item + "'");
    } catch (const std::logic_error&) {
      throw ParseError("xyz: bad moments value '" + item + "'");
    }
  }
  return out;
}

}  // namespace

XyzRecord parse_xyz(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("xyz: empty input");
  long count = 0;
  {
    std::istringstream head(line);
    if (!(head >> count) || count <= 0) throw ParseError("xyz: first line must be the atom count");
  }
  XyzRecord rec;
  if (!std::getline(in, rec.comment)) throw ParseError("xyz: missing comment line");
  if (!rec.comment.empty() && rec.comment.back() == '\r') rec.comment.pop_back();
  rec.moments = parse_moments_key(rec.comment);

  std::vector<std::string> elements;
  Matrix coords(count, 3);
  for (long i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("xyz: expected " + std::to_string(count) + " atoms, found " +
                       std::to_string(i));
    }
    std::istringstream row(line);
    std::string el;
    double x = 0, y = 0, z = 0;
    if (!(row >> el >> x >> y >> z)) throw ParseError("xyz: malformed atom line '" + line + "'");
    if (!isotope_mass(el)) throw ParseError("xyz: unsupported element '" + el + "'");
    elements.push_back(el);
    coords.row(i) << x, y, z;
  }
  try {
    rec.molecule = Molecule::from_elements(std::move(elements), std::move(coords));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("xyz: ") + e.what());
  }
  return rec;
}

XyzRecord read_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_xyz(buf.str());
}

std::string format_xyz(const Molecule& mol, const std::string& comment) {
  std::ostringstream out;
  out << mol.size() << '\n' << comment << '\n' << std::setprecision(12);
  for (Eigen::Index i = 0; i < mol.size(); ++i) {
    out << mol.elements[static_cast<std::size_t>(i)] << ' ' << mol.coords(i, 0) << ' '
        << mol.coords(i, 1) << ' ' << mol.coords(i, 2) << '\n';
  }
  return out.str();
}

void write_xyz(const std::filesystem::path& path, const Molecule& mol, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << format_xyz(mol, comment);
}

std::string moments_comment(const PlanarMoments& moments) {
  std::ostringstream out;
  out << std::setprecision(12) << "moments=" << moments.px << ',' << moments.py << ','
      << moments.pz;
  return out.str();
}

}  // namespace sfm
