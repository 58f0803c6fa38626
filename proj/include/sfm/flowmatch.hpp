#pragma once

// Flow matching on the mass manifold: geodesic training pairs, the Riemannian
// conditional flow matching loss, an exact conditional field for testing, and
// the sampling integrator.

#include "sfm/molecule.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sfm {

/// Velocity field queried on decoded molecular states. The returned n x 3
/// matrix is read in U-space and projected onto T_U M by the caller.
/// Implementations must be safe for concurrent evaluation.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Matrix evaluate(double t, const Molecule& state, const PlanarMoments& moments,
                          std::span<const std::string> atom_types) const = 0;
};

struct TimestepSampler {
  enum class Kind { Uniform, LogitNormal };
  Kind kind = Kind::Uniform;
  double loc = 0.0;
  double scale = 1.0;
};

/// Draw strictly inside (0, 1).
double sample_timestep(const TimestepSampler& sampler, Rng& rng);

/// Noise amplitude gamma * (cos(pi t) + 1) / 2 used during training.
double training_noise_scale(double gamma, double t);
/// Per-step sampler noise amplitude gamma * sqrt(dt) * (cos(pi t) + 1) / 2.
double sampler_noise_scale(double gamma, double t, double dt);

struct TrainingPair {
  double t = 0.0;
  MassManifoldPoint u_t;
  TangentVec udot_t;
  bool converged = false;
  PlanarMoments moments;  // of the target, used to decode u_t
  MassManifoldPoint u0;   // geodesic endpoints
  MassManifoldPoint u1;
};

struct PairOptions {
  bool align = false;
  double gamma = 0.0;  // training-side stochasticity
  int restarts = 64;
  int budget = 256;
  LogOptions log{};
};

/// U1 = embed(canonical mol), U0 uniform on M (optionally aligned to U1),
/// U_t on the geodesic and Udot_t = log_{U_t}(U1) / (1 - t). A logarithm
/// that fails to converge yields converged = false; NonPrincipal propagates.
TrainingPair make_training_pair(const Molecule& mol, double t, Rng& rng,
                                const PairOptions& opts = {});

/// Mean over converged pairs of ||proj(v) - Udot_t||^2 in the canonical
/// metric at U_t. mols[i] supplies masses and atom types for pairs[i].
/// Returns 0 when no pair has converged.
double rcfm_loss(const VelocityField& field, std::span<const TrainingPair> pairs,
                 std::span<const Molecule> mols);

/// Exact conditional field towards one target: returns the first three
/// columns of log_{U}(U_target) / (1 - t), zero for t >= 1 - 1e-9.
class OracleField final : public VelocityField {
 public:
  explicit OracleField(const Molecule& target, LogOptions opts = {});

  Matrix evaluate(double t, const Molecule& state, const PlanarMoments& moments,
                  std::span<const std::string> atom_types) const override;

  const MassManifoldPoint& target_point() const { return target_; }
  const PlanarMoments& target_moments() const { return moments_; }

 private:
  MassManifoldPoint target_;
  PlanarMoments moments_;
  LogOptions opts_;
};

/// Returns zero everywhere.
class ZeroField final : public VelocityField {
 public:
  Matrix evaluate(double t, const Molecule& state, const PlanarMoments& moments,
                  std::span<const std::string> atom_types) const override;
};

struct SamplerConfig {
  int steps = 200;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

struct StepRecord {
  int step = 0;
  double t = 0.0;           // time at which the field was queried
  double step_norm = 0.0;   // canonical norm of the applied increment
  double cumulative = 0.0;  // running curve length
  double drift = 0.0;       // ||U^T U - I||_F after the step
  double moment_error = 0.0;  // of the decoded state after the step
};

struct SampleResult {
  Molecule molecule;
  MassManifoldPoint start;
  MassManifoldPoint final_point;
  std::vector<StepRecord> steps;
  double max_drift = 0.0;
  double max_mass_deviation = 0.0;
  double max_moment_error = 0.0;
};

/// Integrates the field from uniform noise on M with `steps` exponential-map
/// steps, adding tangent noise on every step but the last when gamma > 0.
SampleResult sample(const VelocityField& field, const std::vector<std::string>& elements,
                    const std::vector<double>& masses, const PlanarMoments& moments,
                    const SamplerConfig& cfg);

double curve_length(std::span<const double> step_norms);
double curve_length(std::span<const StepRecord> steps);

/// CSV with header `step,t,step_norm,cumulative_length,orthogonality_drift`.
std::string trajectory_csv(std::span<const StepRecord> steps);

}  // namespace sfm
