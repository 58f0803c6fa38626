#pragma once

// Equivariant optimal transport on M: search over atom-type-preserving row
// permutations and axis reflections diag(s1, s2, s3, 1) of a noise sample
// that bring it close to a data sample.

#include "sfm/massmanifold.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sfm {

struct AlignmentMap {
  std::vector<int> perm;          // row i of the result is row perm[i] of the input
  std::array<int, 3> signs{1, 1, 1};
  double cost = 0.0;

  static AlignmentMap identity(Eigen::Index n);
};

/// Pi U R. Throws TypeViolation if perm is not a permutation or moves an atom
/// onto one of different type (when types are given) or different mass.
MassManifoldPoint apply_alignment(const MassManifoldPoint& u, const AlignmentMap& map,
                                  std::span<const std::string> atom_types = {});

struct AlignOptions {
  int restarts = 64;  // random permutations per reflection
  int budget = 256;   // local search swaps
  std::uint64_t seed = 0;
  bool rerank = false;  // re-score finalists with the converged distance
};

/// Greedy random search: for each of the 8 reflections try `restarts` random
/// type-preserving permutations, then `budget` non-repeating same-type swaps
/// on the best candidate, scored by the one-iteration approximate distance.
/// The identity map is always a candidate. The result is also compared with
/// the search at half the budgets, so doubling both budgets never gives a
/// worse cost for the same seed.
AlignmentMap ot_align(const MassManifoldPoint& u0, const MassManifoldPoint& u1,
                      std::span<const std::string> atom_types, const AlignOptions& opts = {});

/// One pass of the search above without the half-budget comparison.
AlignmentMap ot_align_single(const MassManifoldPoint& u0, const MassManifoldPoint& u1,
                             std::span<const std::string> atom_types, const AlignOptions& opts);

}  // namespace sfm
