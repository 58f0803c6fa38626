#include "sfm/flowmatch.hpp"

#include "sfm/eqot.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <iomanip>

namespace sfm {

double sample_timestep(const TimestepSampler& sampler, Rng& rng) {
  for (;;) {
    double t = 0.0;
    if (sampler.kind == TimestepSampler::Kind::Uniform) {
      t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    } else {
      const double z = std::normal_distribution<double>(sampler.loc, sampler.scale)(rng);
      t = 1.0 / (1.0 + std::exp(-z));
    }
    if (t > 0.0 && t < 1.0) return t;
  }
}

double training_noise_scale(double gamma, double t) {
  return gamma * 0.5 * (std::cos(std::numbers::pi * t) + 1.0);
}

double sampler_noise_scale(double gamma, double t, double dt) {
  return 0.5 * gamma * std::sqrt(dt) * (std::cos(std::numbers::pi * t) + 1.0);
}

TrainingPair make_training_pair(const Molecule& mol, double t, Rng& rng, const PairOptions& opts) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("make_training_pair: t must lie in (0, 1)");
  const Canonical canon = canonicalize(mol);
  const Embedding target = embed(canon.molecule);
  const MassManifoldPoint& u1 = target.point;

  MassManifoldPoint u0 = uniform_on_M(u1.mhat(), rng);
  if (opts.align) {
    AlignOptions ao;
    ao.restarts = opts.restarts;
    ao.budget = opts.budget;
    ao.seed = rng();
    u0 = apply_alignment(u0, ot_align(u0, u1, canon.molecule.elements, ao));
  }

  const LogResult to_target = log_M(u0, u1, opts.log);
  MassManifoldPoint u_t = exp_M(u0, to_target.tangent, t);

  if (opts.gamma > 0.0) {
    const Matrix eps = training_noise_scale(opts.gamma, t) * randn(u_t.n(), 3, rng);
    u_t = exp_M(u_t, tangent_project_M(u_t, eps));
  }

  const LogResult remaining = log_M(u_t, u1, opts.log);
  return TrainingPair{t, u_t, remaining.tangent.scaled(1.0 / (1.0 - t)),
                      to_target.converged && remaining.converged, target.moments, u0, u1};
}

double rcfm_loss(const VelocityField& field, std::span<const TrainingPair> pairs,
                 std::span<const Molecule> mols) {
  if (pairs.size() != mols.size()) throw InvalidArgument("rcfm_loss: pairs and molecules differ");
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TrainingPair& pr = pairs[i];
    if (!pr.converged) continue;
    const Molecule state = unembed(pr.u_t, mols[i].elements, mols[i].masses, pr.moments);
    const Matrix v = field.evaluate(pr.t, state, pr.moments, mols[i].elements);
    const TangentVec pv = tangent_project_M(pr.u_t, v);
    total += canonical_norm_sq(pr.u_t.matrix(), pv.matrix() - pr.udot_t.matrix());
    ++used;
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

OracleField::OracleField(const Molecule& target, LogOptions opts)
    : target_(embed(target).point), moments_(embed(target).moments), opts_(opts) {}

Matrix OracleField::evaluate(double t, const Molecule& state, const PlanarMoments& moments,
                             std::span<const std::string>) const {
  if (t >= 1.0 - 1e-9) return Matrix::Zero(state.size(), 3);
  const MassManifoldPoint u =
      project_to_M(encode(state, moments), unit_mass_vector(state.masses));
  const LogResult lr = log_M(u, target_, opts_);
  return lr.tangent.matrix().leftCols(3) / (1.0 - t);
}

Matrix ZeroField::evaluate(double, const Molecule& state, const PlanarMoments&,
                           std::span<const std::string>) const {
  return Matrix::Zero(state.size(), 3);
}

SampleResult sample(const VelocityField& field, const std::vector<std::string>& elements,
                    const std::vector<double>& masses, const PlanarMoments& moments,
                    const SamplerConfig& cfg) {
  if (cfg.steps < 1) throw InvalidArgument("sample: steps must be >= 1");
  if (cfg.gamma < 0.0) throw InvalidArgument("sample: gamma must be nonnegative");
  if (rotor_class(moments) != RotorClass::Asymmetric) throw DegenerateRotor(rotor_class(moments));
  if (masses.size() < 5 || elements.size() != masses.size()) {
    throw InvalidArgument("sample: need at least 5 atoms with matching types");
  }

  Rng rng(cfg.seed);
  const Vector mhat = unit_mass_vector(masses);
  MassManifoldPoint u = uniform_on_M(mhat, rng);
  const MassManifoldPoint start = u;

  const double dt = 1.0 / cfg.steps;
  double t = 0.0;
  double length = 0.0;
  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.steps));
  double max_drift = orthogonality_drift(u.matrix());
  double max_mass_dev = mass_column_deviation(u.matrix(), mhat);
  double max_err = 0.0;

  for (int step = 1; step <= cfg.steps; ++step) {
    const Molecule x = unembed(u, elements, masses, moments);
    Matrix delta = dt * field.evaluate(t, x, moments, elements);
    if (step < cfg.steps && cfg.gamma > 0.0) {
      delta += sampler_noise_scale(cfg.gamma, t, dt) * randn(u.n(), 3, rng);
    }
    const TangentVec inc = tangent_project_M(u, delta);
    const double norm = canonical_norm(inc);
    u = exp_M(u, inc);

    double drift = orthogonality_drift(u.matrix());
    if (drift > 1e-12) {
      u = project_to_M(u.matrix(), mhat);
      drift = orthogonality_drift(u.matrix());
    }
    length += norm;
    const double err = moment_error(unembed(u, elements, masses, moments), moments);

    records.push_back(StepRecord{step, t, norm, length, drift, err});
    max_drift = std::max(max_drift, drift);
    max_mass_dev = std::max(max_mass_dev, mass_column_deviation(u.matrix(), mhat));
    max_err = std::max(max_err, err);
    t += dt;
  }

  Molecule out = unembed(u, elements, masses, moments);
  return SampleResult{std::move(out), start, u, std::move(records), max_drift, max_mass_dev,
                      max_err};
}

double curve_length(std::span<const double> step_norms) {
  double total = 0.0;
  for (double s : step_norms) total += s;
  return total;
}

double curve_length(std::span<const StepRecord> steps) {
  double total = 0.0;
  for (const auto& s : steps) total += s.step_norm;
  return total;
}

std::string trajectory_csv(std::span<const StepRecord> steps) {
  std::ostringstream out;
  out << "step,t,step_norm,cumulative_length,orthogonality_drift\n" << std::setprecision(12);
  for (const auto& s : steps) {
    out << s.step << ',' << s.t << ',' << s.step_norm << ',' << s.cumulative << ',' << s.drift
        << '\n';
  }
  return out.str();
}

}  // namespace sfm
