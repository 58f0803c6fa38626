#include "sfm/eqot.hpp"

#include "sfm/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace sfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index groups that may be permuted among themselves: same type, same mass.
std::vector<std::vector<int>> exchange_groups(const MassManifoldPoint& u,
                                              std::span<const std::string> types) {
  const auto n = static_cast<int>(u.n());
  if (!types.empty() && static_cast<int>(types.size()) != n) {
    throw InvalidArgument("ot_align: atom type list length mismatch");
  }
  std::map<std::pair<std::string, double>, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    const std::string key = types.empty() ? std::string() : types[static_cast<std::size_t>(i)];
    groups[{key, u.mhat()(i)}].push_back(i);
  }
  std::vector<std::vector<int>> out;
  for (auto& [key, idx] : groups) out.push_back(std::move(idx));
  return out;
}

Matrix aligned_matrix(const Matrix& u, const std::vector<int>& perm,
                      const std::array<int, 3>& signs) {
  Matrix out(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) out.row(i) = u.row(perm[static_cast<std::size_t>(i)]);
  for (int k = 0; k < 3; ++k) out.col(k) *= signs[static_cast<std::size_t>(k)];
  return out;
}

class Scorer {
 public:
  Scorer(const MassManifoldPoint& u0, const MassManifoldPoint& u1)
      : u0_frame_(u0.frame()), u1_frame_(u1.frame()) {}

  double approx(const std::vector<int>& perm, const std::array<int, 3>& signs) const {
    return norm_of(perm, signs, LogOptions{1, 1e-6}, false);
  }

  double exact(const std::vector<int>& perm, const std::array<int, 3>& signs) const {
    return norm_of(perm, signs, LogOptions{}, true);
  }

 private:
  double norm_of(const std::vector<int>& perm, const std::array<int, 3>& signs, LogOptions opts,
                 bool need_convergence) const {
    const Matrix cand = aligned_matrix(u0_frame_, perm, signs);
    try {
      const raw::Log r = raw::log(cand, u1_frame_, opts);
      if (need_convergence && !r.converged) return kInf;
      return std::sqrt(std::max(0.0, canonical_norm_sq(cand, r.tangent)));
    } catch (const NonPrincipal&) {
      return kInf;
    }
  }

  Matrix u0_frame_;
  Matrix u1_frame_;
};

std::array<int, 3> reflection(int code) {
  return {(code & 4) ? -1 : 1, (code & 2) ? -1 : 1, (code & 1) ? -1 : 1};
}

}  // namespace

AlignmentMap AlignmentMap::identity(Eigen::Index n) {
  AlignmentMap map;
  map.perm.resize(static_cast<std::size_t>(n));
  std::iota(map.perm.begin(), map.perm.end(), 0);
  return map;
}

MassManifoldPoint apply_alignment(const MassManifoldPoint& u, const AlignmentMap& map,
                                  std::span<const std::string> atom_types) {
  const auto n = static_cast<std::size_t>(u.n());
  if (map.perm.size() != n) throw TypeViolation("apply_alignment: permutation has wrong length");
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = map.perm[i];
    if (j < 0 || static_cast<std::size_t>(j) >= n || seen[static_cast<std::size_t>(j)]) {
      throw TypeViolation("apply_alignment: not a permutation");
    }
    seen[static_cast<std::size_t>(j)] = 1;
    if (u.mhat()(static_cast<Eigen::Index>(i)) != u.mhat()(j)) {
      throw TypeViolation("apply_alignment: permutation exchanges atoms of different mass");
    }
    if (!atom_types.empty() && atom_types[i] != atom_types[static_cast<std::size_t>(j)]) {
      throw TypeViolation("apply_alignment: permutation exchanges atoms of different type");
    }
  }
  for (int s : map.signs) {
    if (s != 1 && s != -1) throw TypeViolation("apply_alignment: signs must be +-1");
  }
  return MassManifoldPoint(StiefelPoint(aligned_matrix(u.matrix(), map.perm, map.signs)),
                           u.mhat());
}

AlignmentMap ot_align_single(const MassManifoldPoint& u0, const MassManifoldPoint& u1,
                             std::span<const std::string> atom_types, const AlignOptions& opts) {
  if (u0.n() != u1.n() || (u0.mhat() - u1.mhat()).cwiseAbs().maxCoeff() > 1e-10) {
    throw MassMismatch("ot_align: points lie on different mass manifolds");
  }
  const Scorer scorer(u0, u1);
  const auto groups = exchange_groups(u0, atom_types);

  AlignmentMap best = AlignmentMap::identity(u0.n());
  best.cost = scorer.approx(best.perm, best.signs);

  std::vector<AlignmentMap> finalists;
  for (int code = 0; code < 8; ++code) {
    Rng rng = derive_rng(opts.seed, static_cast<std::uint64_t>(code), 0xA11C);
    AlignmentMap branch_best;
    branch_best.cost = kInf;
    branch_best.signs = reflection(code);
    for (int k = 0; k < opts.restarts; ++k) {
      std::vector<int> perm(static_cast<std::size_t>(u0.n()));
      for (const auto& g : groups) {
        std::vector<int> shuffled = g;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (std::size_t a = 0; a < g.size(); ++a) perm[static_cast<std::size_t>(g[a])] = shuffled[a];
      }
      const double c = scorer.approx(perm, branch_best.signs);
      if (c < branch_best.cost) {
        branch_best.cost = c;
        branch_best.perm = std::move(perm);
      }
    }
    if (branch_best.cost < best.cost) best = branch_best;
    if (opts.rerank && !branch_best.perm.empty()) finalists.push_back(branch_best);
  }

  if (opts.budget > 0) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& g : groups)
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b) pairs.emplace_back(g[a], g[b]);
    Rng rng = derive_rng(opts.seed, 8, 0x5A9);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const std::size_t limit = std::min(pairs.size(), static_cast<std::size_t>(opts.budget));
    for (std::size_t k = 0; k < limit; ++k) {
      std::vector<int> perm = best.perm;
      std::swap(perm[static_cast<std::size_t>(pairs[k].first)],
                perm[static_cast<std::size_t>(pairs[k].second)]);
      const double c = scorer.approx(perm, best.signs);
      if (c < best.cost) {
        best.cost = c;
        best.perm = std::move(perm);
      }
    }
  }

  if (opts.rerank) {
    finalists.push_back(AlignmentMap::identity(u0.n()));
    finalists.push_back(best);
    AlignmentMap chosen = best;
    chosen.cost = kInf;
    for (const auto& f : finalists) {
      const double c = scorer.exact(f.perm, f.signs);
      if (c < chosen.cost) {
        chosen = f;
        chosen.cost = c;
      }
    }
    if (chosen.cost < kInf) return chosen;
  }
  return best;
}

AlignmentMap ot_align(const MassManifoldPoint& u0, const MassManifoldPoint& u1,
                      std::span<const std::string> atom_types, const AlignOptions& opts) {
  if (opts.restarts < 0 || opts.budget < 0) throw InvalidArgument("ot_align: negative budget");
  AlignmentMap best = ot_align_single(u0, u1, atom_types, opts);
  if (opts.restarts > 0 || opts.budget > 0) {
    AlignOptions half = opts;
    half.restarts = opts.restarts / 2;
    half.budget = opts.budget / 2;
    AlignmentMap smaller = ot_align(u0, u1, atom_types, half);
    if (smaller.cost < best.cost) best = std::move(smaller);
  }
  return best;
}

}  // namespace sfm
