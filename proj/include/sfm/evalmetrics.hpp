#pragma once

// Structure comparison after optimal same-type permutation and axis reflection.

#include "sfm/molecule.hpp"

#include <map>
#include <string>
#include <vector>

namespace sfm {

/// RMSD minimized over the 8 axis reflections of `cand` and, per reflection,
/// over same-element permutations (one linear assignment per element block
/// with squared-distance cost). Both inputs are expected in principal axes.
/// Throws FormulaMismatch if the element multisets differ.
double aligned_rmsd(const Molecule& ref, const Molecule& cand);

inline constexpr double kSuccessThresholds[] = {0.25, 0.10};

struct EvalReport {
  double min_rmsd = 0.0;
  std::vector<double> per_sample_rmsd;
  double diversity = 0.0;     // mean aligned RMSD over unordered sample pairs
  double moment_error = 0.0;  // mean over samples
  std::map<double, bool> success_at;
};

EvalReport evaluate_samples(const Molecule& ref, const std::vector<Molecule>& samples,
                            const PlanarMoments& target);

/// `sample,rmsd,moment_error` rows.
std::string report_csv(const EvalReport& report, const std::vector<double>& sample_errors = {});
std::string report_summary(const EvalReport& report);

}  // namespace sfm
