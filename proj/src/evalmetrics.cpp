#include "sfm/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sfm {

namespace {

std::map<std::string, std::vector<int>> element_blocks(const Molecule& mol) {
  std::map<std::string, std::vector<int>> blocks;
  for (std::size_t i = 0; i < mol.elements.size(); ++i) {
    blocks[mol.elements[i]].push_back(static_cast<int>(i));
  }
  return blocks;
}

}  // namespace

double aligned_rmsd(const Molecule& ref, const Molecule& cand) {
  const auto ref_blocks = element_blocks(ref);
  const auto cand_blocks = element_blocks(cand);
  if (ref.size() != cand.size() || ref_blocks.size() != cand_blocks.size()) {
    throw FormulaMismatch("aligned_rmsd: molecular formulas differ");
  }
  for (const auto& [el, idx] : ref_blocks) {
    const auto it = cand_blocks.find(el);
    if (it == cand_blocks.end() || it->second.size() != idx.size()) {
      throw FormulaMismatch("aligned_rmsd: molecular formulas differ");
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 8; ++code) {
    const Eigen::RowVector3d signs((code & 4) ? -1.0 : 1.0, (code & 2) ? -1.0 : 1.0,
                                   (code & 1) ? -1.0 : 1.0);
    double total = 0.0;
    for (const auto& [el, ri] : ref_blocks) {
      const auto& ci = cand_blocks.at(el);
      const auto k = static_cast<Eigen::Index>(ri.size());
      Matrix cost(k, k);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
          const Eigen::RowVector3d d = ref.coords.row(ri[static_cast<std::size_t>(a)]) -
                                       cand.coords.row(ci[static_cast<std::size_t>(b)]).cwiseProduct(signs);
          cost(a, b) = d.squaredNorm();
        }
      }
      total += assignment_cost(cost, linear_assignment(cost));
    }
    best = std::min(best, total);
  }
  return std::sqrt(best / static_cast<double>(ref.size()));
}

EvalReport evaluate_samples(const Molecule& ref, const std::vector<Molecule>& samples,
                            const PlanarMoments& target) {
  EvalReport rep;
  rep.min_rmsd = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const double r = aligned_rmsd(ref, s);
    rep.per_sample_rmsd.push_back(r);
    rep.min_rmsd = std::min(rep.min_rmsd, r);
    rep.moment_error += moment_error(s, target);
  }
  if (!samples.empty()) rep.moment_error /= static_cast<double>(samples.size());

  double pair_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      pair_sum += aligned_rmsd(samples[i], samples[j]);
      ++pairs;
    }
  }
  rep.diversity = pairs == 0 ? 0.0 : pair_sum / static_cast<double>(pairs);
  for (double thr : kSuccessThresholds) rep.success_at[thr] = rep.min_rmsd < thr;
  return rep;
}

std::string report_csv(const EvalReport& report, const std::vector<double>& sample_errors) {
  std::ostringstream out;
  out << "sample,rmsd";
  if (!sample_errors.empty()) out << ",moment_error";
  out << '\n' << std::setprecision(12);
  for (std::size_t i = 0; i < report.per_sample_rmsd.size(); ++i) {
    out << i << ',' << report.per_sample_rmsd[i];
    if (i < sample_errors.size()) out << ',' << sample_errors[i];
    out << '\n';
  }
  return out.str();
}

std::string report_summary(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "samples        " << report.per_sample_rmsd.size() << '\n';
  out << "min_rmsd       " << report.min_rmsd << " A\n";
  out << "diversity      " << report.diversity << " A\n";
  out << "moment_error   " << report.moment_error << " amu A^2\n";
  for (const auto& [thr, ok] : report.success_at) {
    out << "success<" << thr << "A " << (ok ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace sfm
