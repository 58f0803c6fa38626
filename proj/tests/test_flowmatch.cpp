#include "sfm/errors.hpp"
#include "sfm/evalmetrics.hpp"
#include "sfm/flowmatch.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace sfm;
using testing::max_abs;

namespace {

class ConstantField final : public VelocityField {
 public:
  explicit ConstantField(Matrix w) : w_(std::move(w)) {}
  Matrix evaluate(double, const Molecule&, const PlanarMoments&,
                  std::span<const std::string>) const override {
    return w_;
  }

 private:
  Matrix w_;
};

}  // namespace

TEST_CASE("sample_timestep") {
  Rng rng(71);
  constexpr int kDraws = 100000;
  double sum = 0.0;
  std::vector<double> draws;
  for (int i = 0; i < kDraws; ++i) {
    const double t = sample_timestep({}, rng);
    CHECK_FALSE((t <= 0.0 || t >= 1.0));
    sum += t;
  }
  CHECK(std::abs(sum / kDraws - 0.5) < 0.01);

  const TimestepSampler logit{TimestepSampler::Kind::LogitNormal, 0.0, 1.0};
  for (int i = 0; i < kDraws; ++i) draws.push_back(sample_timestep(logit, rng));
  std::nth_element(draws.begin(), draws.begin() + kDraws / 2, draws.end());
  CHECK(std::abs(draws[kDraws / 2] - 0.5) < 0.01);
  CHECK(*std::min_element(draws.begin(), draws.end()) > 0.0);
  CHECK(*std::max_element(draws.begin(), draws.end()) < 1.0);
}

TEST_CASE("noise schedules") {
  CHECK(training_noise_scale(0.3, 0.0) == doctest::Approx(0.3));
  CHECK(training_noise_scale(0.3, 0.5) == doctest::Approx(0.15));
  CHECK(std::abs(training_noise_scale(0.3, 1.0)) < 1e-16);
  CHECK(sampler_noise_scale(0.2, 0.0, 0.01) == doctest::Approx(0.02));
}

TEST_CASE("make_training_pair geometry") {
  Rng rng(72);
  const Molecule mol = synthetic_molecule(18, rng);
  for (double t : {1e-7, 0.2, 0.5, 0.9}) {
    const TrainingPair pr = make_training_pair(mol, t, rng);
    REQUIRE(pr.converged);
    CHECK(max_abs(pr.udot_t.matrix().col(3)) == 0.0);
    CHECK(max_abs(pr.udot_t.base().matrix() - pr.u_t.matrix()) == 0.0);
    const double d = distance_M(pr.u0, pr.u1);
    CHECK(std::abs(canonical_norm(pr.udot_t) - d) < 1e-4);
    if (t < 1e-6) CHECK(max_abs(pr.u_t.matrix() - pr.u0.matrix()) < 1e-5);
  }
  CHECK_THROWS_AS(make_training_pair(mol, 0.0, rng), InvalidArgument);
  CHECK_THROWS_AS(make_training_pair(mol, 1.0, rng), InvalidArgument);
}

TEST_CASE("make_training_pair target velocity matches finite differences") {
  Rng rng(73);
  constexpr double h = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const Molecule mol = synthetic_molecule(12, rng);
    const double t = 0.1 + 0.08 * trial;
    const TrainingPair pr = make_training_pair(mol, t, rng);
    if (!pr.converged) continue;
    const LogResult full = log_M(pr.u0, pr.u1);
    const MassManifoldPoint ahead = exp_M(pr.u0, full.tangent, t + h);
    const Matrix fd = log_M(pr.u_t, ahead).tangent.matrix() / h;
    CHECK(std::sqrt(canonical_norm_sq(pr.u_t.matrix(), fd - pr.udot_t.matrix())) < 10 * h);
  }
}

TEST_CASE("aligned and noisy training pairs") {
  Rng rng(74);
  const Molecule mol = synthetic_molecule(10, rng);
  PairOptions opts;
  opts.align = true;
  opts.restarts = 8;
  opts.budget = 16;
  const TrainingPair a = make_training_pair(mol, 0.4, rng, opts);
  CHECK(mass_column_deviation(a.u_t.matrix(), a.u1.mhat()) < 1e-12);
  opts.align = false;
  opts.gamma = 0.1;
  const TrainingPair b = make_training_pair(mol, 0.4, rng, opts);
  CHECK(orthogonality_drift(b.u_t.matrix()) < 1e-10);
  CHECK(max_abs(b.udot_t.matrix().col(3)) == 0.0);
}

TEST_CASE("rcfm_loss") {
  Rng rng(75);
  const Molecule target = canonicalize(synthetic_molecule(9, rng)).molecule;
  std::vector<TrainingPair> pairs;
  std::vector<Molecule> mols;
  for (double t : {0.2, 0.5, 0.8}) {
    pairs.push_back(make_training_pair(target, t, rng));
    mols.push_back(target);
  }
  CHECK(rcfm_loss(OracleField(target), pairs, mols) < 1e-10);

  double mean_sq = 0.0;
  for (const auto& p : pairs) mean_sq += canonical_norm(p.udot_t) * canonical_norm(p.udot_t);
  CHECK(rcfm_loss(ZeroField(), pairs, mols) == doctest::Approx(mean_sq / 3.0).epsilon(1e-12));

  const Matrix w = randn(9, 3, rng);
  double hand = 0.0;
  for (const auto& p : pairs) {
    const Matrix diff = tangent_project_M(p.u_t, w).matrix() - p.udot_t.matrix();
    const Matrix& u = p.u_t.matrix();
    hand += diff.squaredNorm() - 0.5 * (u.transpose() * diff).squaredNorm();
  }
  CHECK(rcfm_loss(ConstantField(w), pairs, mols) == doctest::Approx(hand / 3.0).epsilon(1e-12));

  pairs[1].converged = false;
  const double two = rcfm_loss(ZeroField(), pairs, mols);
  CHECK(two == doctest::Approx((canonical_norm(pairs[0].udot_t) * canonical_norm(pairs[0].udot_t) +
                                canonical_norm(pairs[2].udot_t) * canonical_norm(pairs[2].udot_t)) /
                               2.0));
}

TEST_CASE("oracle field") {
  Rng rng(76);
  const Molecule target = canonicalize(synthetic_molecule(14, rng)).molecule;
  const OracleField field(target);
  const PlanarMoments& pm = field.target_moments();
  for (double t : {0.1, 0.6}) {
    const TrainingPair pr = make_training_pair(target, t, rng);
    REQUIRE(pr.converged);
    const Molecule state = unembed(pr.u_t, target.elements, target.masses, pr.moments);
    const Matrix v = field.evaluate(t, state, pm, target.elements);
    CHECK(max_abs(v - pr.udot_t.matrix().leftCols(3)) < 1e-8);
  }
  CHECK(max_abs(field.evaluate(0.3, target, pm, target.elements)) < 1e-12);
  CHECK(max_abs(field.evaluate(1.0, target, pm, target.elements)) == 0.0);
}

TEST_CASE("sampler with the oracle field recovers the target") {
  Rng rng(77);
  const Molecule target = canonicalize(synthetic_molecule(18, rng)).molecule;
  const OracleField field(target);
  SamplerConfig cfg;
  cfg.seed = 5;
  const SampleResult a = sample(field, target.elements, target.masses, field.target_moments(), cfg);
  CHECK(aligned_rmsd(target, a.molecule) < 1e-3);
  CHECK(a.steps.size() == 200);
  CHECK(a.max_moment_error / field.target_moments().px < 1e-9);
  CHECK(a.max_drift < 1e-10);
  CHECK(a.max_mass_deviation < 1e-12);
  const double geo = distance_M(a.start, field.target_point(), LogOptions{500, 1e-12});
  CHECK(std::abs(curve_length(a.steps) - geo) < 1e-3);

  const SampleResult again = sample(field, target.elements, target.masses, field.target_moments(), cfg);
  CHECK(trajectory_csv(a.steps) == trajectory_csv(again.steps));
  CHECK(max_abs(a.final_point.matrix() - again.final_point.matrix()) == 0.0);

  cfg.steps = 400;
  const SampleResult fine = sample(field, target.elements, target.masses, field.target_moments(), cfg);
  CHECK(std::abs(curve_length(fine.steps) - curve_length(a.steps)) < 1e-3);
}

TEST_CASE("stochastic sampler still converges") {
  Rng rng(78);
  const Molecule target = canonicalize(synthetic_molecule(12, rng)).molecule;
  const OracleField field(target);
  SamplerConfig cfg;
  cfg.seed = 9;
  cfg.gamma = 0.1;
  const SampleResult a = sample(field, target.elements, target.masses, field.target_moments(), cfg);
  CHECK(aligned_rmsd(target, a.molecule) < 5e-2);
  const SampleResult b = sample(field, target.elements, target.masses, field.target_moments(), cfg);
  CHECK(trajectory_csv(a.steps) == trajectory_csv(b.steps));
}

TEST_CASE("sampler edge cases") {
  Rng rng(79);
  const Molecule target = canonicalize(synthetic_molecule(8, rng)).molecule;
  const PlanarMoments pm = canonicalize(target).moments;
  SamplerConfig cfg;
  cfg.steps = 50;
  const SampleResult z = sample(ZeroField(), target.elements, target.masses, pm, cfg);
  CHECK(curve_length(z.steps) == 0.0);
  CHECK(max_abs(z.final_point.matrix() - z.start.matrix()) < 1e-14);

  cfg.steps = 0;
  CHECK_THROWS_AS(sample(ZeroField(), target.elements, target.masses, pm, cfg), InvalidArgument);
  cfg.steps = 10;
  CHECK_THROWS_AS(sample(ZeroField(), target.elements, target.masses, PlanarMoments::principal(8, 4, 0), cfg),
                  DegenerateRotor);
}

TEST_CASE("curve length and trajectory CSV") {
  const std::vector<double> norms{0.5, 0.25, 0.25};
  CHECK(curve_length(norms) == 1.0);
  std::vector<StepRecord> steps{{1, 0.0, 0.5, 0.5, 1e-16, 0.0}, {2, 0.5, 0.25, 0.75, 0.0, 0.0}};
  const std::string csv = trajectory_csv(steps);
  CHECK(csv == "step,t,step_norm,cumulative_length,orthogonality_drift\n1,0,0.5,0.5,1e-16\n2,0.5,0.25,0.75,0\n");
}
