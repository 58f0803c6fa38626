#include "sfm/errors.hpp"
#include "sfm/xyz.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace sfm;

TEST_CASE("parse_xyz reads atoms and the moments key") {
  const XyzRecord rec = parse_xyz(
      "5\nsample moments=8,4.5,2 extra\nC 0 0 0\nH 1 0 0\nH -1 0.5 0\nH 0 0 1.25\nO 0.1 -0.2 0.3\n");
  CHECK(rec.molecule.size() == 5);
  CHECK(rec.molecule.elements[4] == "O");
  CHECK(rec.molecule.coords(3, 2) == 1.25);
  REQUIRE(rec.moments);
  CHECK((*rec.moments)[1] == 4.5);
  CHECK(rec.comment == "sample moments=8,4.5,2 extra");
}

TEST_CASE("parse_xyz failures") {
  CHECK_THROWS_AS(parse_xyz(""), ParseError);
  CHECK_THROWS_AS(parse_xyz("x\n\n"), ParseError);
  CHECK_THROWS_AS(parse_xyz("5\nc\nC 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_xyz("5\nc\nC 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_xyz("5\nc\nZz 0 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_xyz("5\nmoments=1,2\nC 0 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\nH 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(read_xyz("/nonexistent/file.xyz"), ParseError);
}

TEST_CASE("format_xyz round trip keeps 12 significant digits") {
  Rng rng(61);
  const Molecule mol = synthetic_molecule(11, rng);
  const PlanarMoments pm = canonicalize(mol).moments;
  const std::string text = format_xyz(mol, moments_comment(pm));
  const XyzRecord back = parse_xyz(text);
  CHECK(back.molecule.elements == mol.elements);
  CHECK(testing::max_abs(back.molecule.coords - mol.coords) < 1e-10);
  REQUIRE(back.moments);
  CHECK((*back.moments)[0] == doctest::Approx(pm.px).epsilon(1e-11));
  CHECK(format_xyz(back.molecule, back.comment) == text);
}
