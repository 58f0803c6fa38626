#include "sfm/bench.hpp"

#include "sfm/molecule.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

namespace sfm {

namespace {

constexpr LogOptions kReferenceLog{500, 1e-12};

struct TrialPair {
  MassManifoldPoint noise;
  MassManifoldPoint data;
  std::vector<std::string> elements;
};

TrialPair draw_pair(int n, std::uint64_t seed, std::size_t trial) {
  Rng rng = derive_rng(seed, trial, 0xB3);
  Molecule mol = synthetic_molecule(n, rng);
  Embedding target = embed(mol);
  MassManifoldPoint noise = uniform_on_M(target.point.mhat(), rng);
  return TrialPair{std::move(noise), std::move(target.point), std::move(mol.elements)};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  return sab / std::sqrt(saa * sbb);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

LogBenchSummary run_logbench(int n, int trials, std::uint64_t seed, LogOptions opts) {
  LogBenchSummary s;
  s.trials.resize(static_cast<std::size_t>(std::max(trials, 0)));
  parallel_for(s.trials.size(), [&](std::size_t i) {
    const TrialPair pair = draw_pair(n, seed, i);
    LogTrial& out = s.trials[i];
    try {
      const LogResult r = log_M(pair.noise, pair.data, opts);
      out.iterations = r.iterations;
      out.residual = r.final_residual;
      out.converged = r.converged;
      const LogResult ref = log_M(pair.noise, pair.data, kReferenceLog);
      out.error_vs_reference = (r.tangent.matrix() - ref.tangent.matrix()).cwiseAbs().maxCoeff();
    } catch (const NonPrincipal&) {
      out.non_principal = true;
      out.converged = false;
      out.residual = std::numeric_limits<double>::infinity();
      out.error_vs_reference = std::numeric_limits<double>::infinity();
    }
  });

  std::vector<double> iters, errors;
  for (const auto& t : s.trials) {
    if (t.converged) {
      iters.push_back(t.iterations);
    } else {
      errors.push_back(t.error_vs_reference);
    }
  }
  s.convergence_rate = s.trials.empty() ? 0.0 : static_cast<double>(iters.size()) / s.trials.size();
  s.median_iterations = median(iters);
  s.median_nonconverged_error = median(errors);
  return s;
}

std::string logbench_csv(const LogBenchSummary& s) {
  std::ostringstream out;
  out << "trial,iterations,residual,converged,error_vs_reference\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    out << i << ',' << t.iterations << ',' << t.residual << ',' << (t.converged ? 1 : 0) << ','
        << t.error_vs_reference << '\n';
  }
  return out.str();
}

DistBenchSummary run_distbench(int n, int trials, std::uint64_t seed) {
  DistBenchSummary s;
  s.trials.resize(static_cast<std::size_t>(std::max(trials, 0)));
  parallel_for(s.trials.size(), [&](std::size_t i) {
    const TrialPair pair = draw_pair(n, seed, i);
    DistTrial& out = s.trials[i];
    try {
      out.approx = approx_distance_M(pair.noise, pair.data);
      const LogResult r = log_M(pair.noise, pair.data);
      out.exact = canonical_norm(r.tangent);
      out.converged = r.converged;
    } catch (const NonPrincipal&) {
      out.converged = false;
    }
  });

  std::vector<double> a, e;
  int bounded = 0;
  for (const auto& t : s.trials) {
    if (!t.converged) continue;
    a.push_back(t.approx);
    e.push_back(t.exact);
    if (t.approx >= t.exact - 1e-12) ++bounded;
  }
  s.converged_count = static_cast<int>(a.size());
  s.spearman_rho = spearman(a, e);
  s.upper_bound_fraction = a.empty() ? 0.0 : static_cast<double>(bounded) / a.size();
  return s;
}

std::string distbench_csv(const DistBenchSummary& s) {
  std::ostringstream out;
  out << "trial,approx_distance,true_distance,converged\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    out << i << ',' << t.approx << ',' << t.exact << ',' << (t.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

OtBenchSummary run_otbench(int n, int trials, std::uint64_t seed, int restarts, int budget) {
  OtBenchSummary s;
  s.trials.resize(static_cast<std::size_t>(std::max(trials, 0)));
  const LogOptions dist_opts{100, 1e-6};
  parallel_for(s.trials.size(), [&](std::size_t i) {
    const TrialPair pair = draw_pair(n, seed, i);
    OtTrial& out = s.trials[i];
    AlignOptions ao;
    ao.restarts = restarts;
    ao.budget = budget;
    ao.seed = derive_rng(seed, i, 0x07)();
    try {
      const AlignmentMap map = ot_align(pair.noise, pair.data, pair.elements, ao);
      const MassManifoldPoint moved = apply_alignment(pair.noise, map, pair.elements);
      const LogResult before = log_M(pair.noise, pair.data, dist_opts);
      const LogResult after = log_M(moved, pair.data, dist_opts);
      out.unaligned = canonical_norm(before.tangent);
      out.aligned = canonical_norm(after.tangent);
      out.converged = before.converged && after.converged;
    } catch (const NonPrincipal&) {
      out.converged = false;
    }
  });

  double su = 0.0, sa = 0.0;
  for (const auto& t : s.trials) {
    if (!t.converged) continue;
    su += t.unaligned;
    sa += t.aligned;
    ++s.converged_count;
  }
  if (s.converged_count > 0) {
    s.mean_unaligned = su / s.converged_count;
    s.mean_aligned = sa / s.converged_count;
    s.relative_reduction = s.mean_unaligned > 0 ? 1.0 - s.mean_aligned / s.mean_unaligned : 0.0;
  }
  return s;
}

std::string otbench_csv(const OtBenchSummary& s) {
  std::ostringstream out;
  out << "trial,unaligned_distance,aligned_distance,converged\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    out << i << ',' << t.unaligned << ',' << t.aligned << ',' << (t.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace sfm
