#pragma once

// Log-convergence, approximate-distance and alignment benchmarks over random
// (uniform noise, synthetic molecule) pairs on M. Trials are independent and
// seeded from (seed, trial index), so results do not depend on threading.

#include "sfm/eqot.hpp"
#include "sfm/stiefel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sfm {

/// Runs fn(i) for i in [0, count) on a pool of worker threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned workers = 0);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double median(std::vector<double> values);

struct LogTrial {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool non_principal = false;
  double error_vs_reference = 0.0;  // inf-norm against a long-run logarithm
};

struct LogBenchSummary {
  std::vector<LogTrial> trials;
  double convergence_rate = 0.0;
  double median_iterations = 0.0;       // over converged trials
  double median_nonconverged_error = 0.0;
};

LogBenchSummary run_logbench(int n, int trials, std::uint64_t seed, LogOptions opts = {});
std::string logbench_csv(const LogBenchSummary& s);

struct DistTrial {
  double approx = 0.0;
  double exact = 0.0;
  bool converged = false;
};

struct DistBenchSummary {
  std::vector<DistTrial> trials;
  double spearman_rho = 0.0;        // over converged trials
  double upper_bound_fraction = 0.0;  // approx >= exact among converged
  int converged_count = 0;
};

DistBenchSummary run_distbench(int n, int trials, std::uint64_t seed);
std::string distbench_csv(const DistBenchSummary& s);

struct OtTrial {
  double unaligned = 0.0;
  double aligned = 0.0;
  bool converged = false;
};

struct OtBenchSummary {
  std::vector<OtTrial> trials;
  double mean_unaligned = 0.0;  // over trials where both logs converged
  double mean_aligned = 0.0;
  double relative_reduction = 0.0;
  int converged_count = 0;
};

OtBenchSummary run_otbench(int n, int trials, std::uint64_t seed, int restarts, int budget);
std::string otbench_csv(const OtBenchSummary& s);

}  // namespace sfm
