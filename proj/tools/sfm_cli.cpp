// sfm: command-line front end for embedding, sampling, alignment and the
// logarithm/distance/alignment benchmarks.

#include "sfm/bench.hpp"
#include "sfm/evalmetrics.hpp"
#include "sfm/flowmatch.hpp"
#include "sfm/molecule.hpp"
#include "sfm/xyz.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace sfm;

namespace {

enum Exit { kOk = 0, kIo = 1, kParse = 2, kDegenerate = 3, kNumerical = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using FileSet = std::vector<std::pair<std::string, std::string>>;

// Writes every file to a temporary name first and renames only once all
// writes succeeded, so a failure never leaves a partial set behind.
void commit_files(const fs::path& dir, const FileSet& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> staged;
  auto discard = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = dir / (name + ".partial");
    staged.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    out.close();
    if (!out) {
      discard();
      throw IoError("cannot write " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], dir / files[i].first, ec);
    if (ec) {
      discard();
      throw IoError("cannot rename " + staged[i].string() + ": " + ec.message());
    }
  }
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::string matrix_csv(const Matrix& u) {
  std::ostringstream out;
  out << std::setprecision(12);
  for (Eigen::Index j = 0; j < u.cols(); ++j) out << (j ? "," : "") << "u" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) out << (j ? "," : "") << u(i, j);
    out << '\n';
  }
  return out.str();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParseError(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  return out;
}

PlanarMoments parse_moments(const std::string& text) {
  const auto v = parse_list(text, "moments");
  if (v.size() != 3) throw ParseError("--moments needs three comma-separated values");
  return PlanarMoments::principal(v[0], v[1], v[2]);
}

struct Common {
  std::string out_dir = ".";
};

int cmd_embed(const std::string& path, const Common& c) {
  const XyzRecord rec = read_xyz(path);
  const Canonical canon = canonicalize(rec.molecule);
  const Embedding e = embed(canon.molecule);
  const auto res = constraint_residuals(canon.molecule, e.moments);
  commit_files(c.out_dir, {{"embedding.csv", matrix_csv(e.point.matrix())}});

  static const char* names[9] = {"Pxx - Px", "Pyy - Py", "Pzz - Pz", "Pyz", "Pxz",
                                 "Pxy",      "sum m x",  "sum m y",  "sum m z"};
  std::cout << "moments " << num(e.moments.px) << ' ' << num(e.moments.py) << ' '
            << num(e.moments.pz) << '\n';
  std::cout << "rotor " << to_string(rotor_class(e.moments)) << '\n';
  std::cout << "residuals\n" << std::scientific << std::setprecision(12);
  for (int k = 0; k < 9; ++k) std::cout << "  " << std::left << std::setw(10) << names[k] << res[k] << '\n';
  return kOk;
}

int cmd_roundtrip(const std::string& path, int steps, std::uint64_t seed, double gamma,
                  const Common& c) {
  const XyzRecord rec = read_xyz(path);
  const Canonical canon = canonicalize(rec.molecule);
  const OracleField field(canon.molecule);
  SamplerConfig cfg;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.gamma = gamma;
  const SampleResult res =
      sample(field, canon.molecule.elements, canon.molecule.masses, field.target_moments(), cfg);
  const double rmsd = aligned_rmsd(canon.molecule, res.molecule);
  const double length = curve_length(res.steps);
  commit_files(c.out_dir, {{"sample.xyz", format_xyz(res.molecule, moments_comment(field.target_moments()))},
                           {"trajectory.csv", trajectory_csv(res.steps)}});
  std::cout << "rmsd " << num(rmsd) << '\n';
  std::cout << "curve_length " << num(length) << '\n';
  std::cout << "max_moment_error " << num(res.max_moment_error) << '\n';
  return kOk;
}

int cmd_logbench(int n, int trials, std::uint64_t seed, const Common& c) {
  const LogBenchSummary s = run_logbench(n, trials, seed);
  commit_files(c.out_dir, {{"logbench.csv", logbench_csv(s)}});
  std::cout << "trials " << s.trials.size() << '\n'
            << "convergence_rate " << num(s.convergence_rate) << '\n'
            << "median_iterations " << num(s.median_iterations) << '\n'
            << "median_nonconverged_error " << num(s.median_nonconverged_error) << '\n';
  return kOk;
}

int cmd_distbench(int n, int trials, std::uint64_t seed, const Common& c) {
  const DistBenchSummary s = run_distbench(n, trials, seed);
  commit_files(c.out_dir, {{"distbench.csv", distbench_csv(s)}});
  std::cout << "trials " << s.trials.size() << '\n'
            << "converged " << s.converged_count << '\n'
            << "spearman " << num(s.spearman_rho) << '\n'
            << "upper_bound_fraction " << num(s.upper_bound_fraction) << '\n';
  return kOk;
}

int cmd_otbench(int n, int trials, std::uint64_t seed, int restarts, int budget, const Common& c) {
  const OtBenchSummary s = run_otbench(n, trials, seed, restarts, budget);
  commit_files(c.out_dir, {{"otbench.csv", otbench_csv(s)}});
  std::cout << "trials " << s.trials.size() << '\n'
            << "converged " << s.converged_count << '\n'
            << "mean_unaligned " << num(s.mean_unaligned) << '\n'
            << "mean_aligned " << num(s.mean_aligned) << '\n'
            << "relative_reduction " << num(s.relative_reduction) << '\n';
  return kOk;
}

int cmd_rmsd(const std::string& a, const std::string& b) {
  const Molecule ma = canonicalize(read_xyz(a).molecule).molecule;
  const Molecule mb = canonicalize(read_xyz(b).molecule).molecule;
  std::cout << "rmsd " << num(aligned_rmsd(ma, mb)) << '\n';
  return kOk;
}

int cmd_noise(const std::string& formula_from, const std::string& masses_text,
              const std::string& moments_text, int count, std::uint64_t seed, const Common& c) {
  if (formula_from.empty() == masses_text.empty()) {
    throw ParseError("noise: give exactly one of --formula-from or --masses");
  }
  if (count < 1) throw ParseError("noise: --count must be >= 1");
  std::vector<std::string> elements;
  std::vector<double> masses;
  PlanarMoments pm;
  bool have_moments = false;
  if (!moments_text.empty()) {
    pm = parse_moments(moments_text);
    have_moments = true;
  }
  if (!formula_from.empty()) {
    const XyzRecord rec = read_xyz(formula_from);
    elements = rec.molecule.elements;
    masses = rec.molecule.masses;
    if (!have_moments) {
      pm = rec.moments ? PlanarMoments::principal((*rec.moments)[0], (*rec.moments)[1], (*rec.moments)[2])
                       : canonicalize(rec.molecule).moments;
    }
  } else {
    masses = parse_list(masses_text, "masses");
    for (double m : masses) {
      if (!(m > 0.0)) throw ParseError("noise: masses must be positive");
    }
    if (masses.size() < 5) throw ParseError("noise: at least 5 masses required");
    elements.assign(masses.size(), "X");
    if (!have_moments) throw ParseError("noise: --moments is required with --masses");
  }
  const RotorClass cls = rotor_class(pm);
  if (cls != RotorClass::Asymmetric) throw DegenerateRotor(cls);

  Rng rng(seed);
  const Vector mhat = unit_mass_vector(masses);
  std::vector<Molecule> samples;
  FileSet files;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    Molecule mol = unembed(uniform_on_M(mhat, rng), elements, masses, pm);
    worst = std::max(worst, moment_error(mol, pm));
    std::ostringstream name;
    name << "noise_" << std::setw(3) << std::setfill('0') << k << ".xyz";
    files.emplace_back(name.str(), format_xyz(mol, moments_comment(pm)));
    samples.push_back(std::move(mol));
  }
  double diversity = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j, ++pairs)
      diversity += aligned_rmsd(samples[i], samples[j]);
  if (pairs > 0) diversity /= pairs;
  commit_files(c.out_dir, files);
  std::cout << "written " << count << '\n'
            << "max_moment_error " << num(worst) << '\n'
            << "diversity " << num(diversity) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stiefel flow matching toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--out-dir", common.out_dir, "Directory for output files")->capture_default_str();

  std::string xyz, xyz_b, formula_from, masses, moments;
  int steps = 200, n = 18, trials = 1000, restarts = 64, budget = 256, count = 10;
  std::uint64_t seed = 0;
  double gamma = 0.0;

  auto* embed_cmd = app.add_subcommand("embed", "Embed a molecule on the mass manifold");
  embed_cmd->add_option("xyz", xyz, "Input XYZ file")->required();

  auto* rt = app.add_subcommand("roundtrip", "Sample toward a target with the exact field");
  rt->add_option("xyz", xyz, "Target XYZ file")->required();
  rt->add_option("--steps", steps, "Integration steps")->check(CLI::PositiveNumber)->capture_default_str();
  rt->add_option("--seed", seed, "Random seed")->required();
  rt->add_option("--gamma", gamma, "Sampler noise level")->check(CLI::NonNegativeNumber)->capture_default_str();

  auto add_bench = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--n", n, "Atoms per synthetic molecule")->check(CLI::Range(5, 100000))->capture_default_str();
    sub->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", seed, "Random seed")->required();
    return sub;
  };
  auto* logb = add_bench("logbench", "Logarithm convergence benchmark");
  auto* distb = add_bench("distbench", "Approximate distance benchmark");
  auto* otb = add_bench("otbench", "Alignment benchmark");
  otb->add_option("--restarts", restarts, "Random permutations per reflection")->check(CLI::NonNegativeNumber)->capture_default_str();
  otb->add_option("--budget", budget, "Local search swaps")->check(CLI::NonNegativeNumber)->capture_default_str();

  auto* rmsd_cmd = app.add_subcommand("rmsd", "Aligned RMSD between two structures");
  rmsd_cmd->add_option("a", xyz, "First XYZ file")->required();
  rmsd_cmd->add_option("b", xyz_b, "Second XYZ file")->required();

  auto* noise_cmd = app.add_subcommand("noise", "Uniform samples with prescribed moments");
  noise_cmd->add_option("--formula-from", formula_from, "XYZ file supplying atoms (and moments)");
  noise_cmd->add_option("--masses", masses, "Comma-separated atomic masses");
  noise_cmd->add_option("--moments", moments, "Px,Py,Pz");
  noise_cmd->add_option("--count", count, "Number of structures")->capture_default_str();
  noise_cmd->add_option("--seed", seed, "Random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*embed_cmd) return cmd_embed(xyz, common);
    if (*rt) return cmd_roundtrip(xyz, steps, seed, gamma, common);
    if (*logb) return cmd_logbench(n, trials, seed, common);
    if (*distb) return cmd_distbench(n, trials, seed, common);
    if (*otb) return cmd_otbench(n, trials, seed, restarts, budget, common);
    if (*rmsd_cmd) return cmd_rmsd(xyz, xyz_b);
    if (*noise_cmd) return cmd_noise(formula_from, masses, moments, count, seed, common);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const DegenerateRotor& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
