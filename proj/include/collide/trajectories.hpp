#pragma once

#include "collide/collision.hpp"

#include <cstdint>
#include <vector>

namespace collide {

// Counter-based uniform generator: every deviate is a pure function of
// (seed, trajectory index, call counter), so trajectories reproduce
// bit-for-bit no matter how runs are scheduled or parallelized.
struct StepRng {
  std::uint64_t seed = 0;
  std::uint64_t trajectory = 0;
  std::uint64_t counter = 0;

  // Uniform in [0, 1); advances the counter.
  double next();
  // The deviate for an explicit counter value, without advancing.
  double at(std::uint64_t counter_value) const;
};

// Orthonormal ancilla measurement basis. Construction checks the Gram matrix
// against the identity (1e-12) and that the basis spans the whole space.
struct MeasurementBasis {
  std::vector<ComplexVector> kets;

  static MeasurementBasis create(std::vector<ComplexVector> kets);
  Eigen::Index dim() const { return kets.empty() ? 0 : kets.front().size(); }
};

// Measurement-conditioned Kraus operators K_k = <k|U|chi> for an ancilla
// prepared in chi and read out in the given basis.
std::vector<ComplexMatrix> conditional_kraus(const ComplexMatrix& U,
                                             const ComplexVector& chi,
                                             const MeasurementBasis& basis);

struct PovmOutcome {
  int k = 0;
  ComplexVector psi;
  double probability = 0.0;
};

struct PovmOutcomeMixed {
  int k = 0;
  DensityMatrix rho;
  double probability = 0.0;
};

// Sample one measurement outcome by inverse CDF in basis order (ties go to
// the lower index) and collapse the state. Throws "state annihilated" if
// every outcome has numerically zero probability, which a complete Kraus set
// cannot produce.
PovmOutcome povm_step(const ComplexVector& psi, const std::vector<ComplexMatrix>& kraus,
                      StepRng& rng);
PovmOutcomeMixed povm_step(const DensityMatrix& rho,
                           const std::vector<ComplexMatrix>& kraus, StepRng& rng);

// One measured trajectory. Outcomes are basis indices; a step counts as a
// jump when its outcome differs from the ancilla's own input component (the
// basis vector with the largest overlap with chi).
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t trajectory = 0;
  std::vector<int> outcomes;             // k_1 .. k_n
  std::vector<ComplexVector> states;     // normalized conditional states
  std::vector<int> jump_steps;           // 1-based indices of jump outcomes
};

// Run one collision trajectory: at each step build the collision unitary
// from the model, form the conditional Kraus family, sample an outcome.
// Deterministic for fixed (seed, trajectory) regardless of execution order.
// Requires the Basic variant and pure ancillas.
TrajectoryRecord simulate_trajectory(const CollisionModelSpec& spec,
                                     const ComplexVector& psi0,
                                     const MeasurementBasis& basis, std::uint64_t seed,
                                     int n_steps, std::uint64_t trajectory_index = 0);

// Sum over every outcome history of n steps with exact weights. Exponential
// in n; the ground truth the Monte Carlo average must reproduce.
DensityMatrix enumerate_average(const CollisionModelSpec& spec, const ComplexVector& psi0,
                                const MeasurementBasis& basis, int n_steps);

// Piecewise-deterministic jump scheme for the continuous-time limit.
struct JumpScheme {
  ComplexMatrix L;
  ComplexMatrix H_S;  // optional drive; empty = 0, enters the drift term only
  double dt = 0.0;
};

// One step of the stochastic state equation in normalized-branch form:
// with probability <L†L> dt jump to L psi / |L psi|, otherwise drift with
// (1 - i H_S dt - dt/2 (L†L - <L†L>)) and renormalize. Enforces the
// weak-measurement guard dt <L†L> <= 0.1.
ComplexVector sse_step(const ComplexVector& psi, const JumpScheme& scheme, StepRng& rng);

struct EnsembleSample {
  int step = 0;
  DensityMatrix rho;           // mean of |psi><psi| across trajectories
  Eigen::MatrixXd stderr_abs;  // standard error of the mean, entrywise
};

// Average conditional states across trajectories, step by step. All records
// must share the same length and dimension ("grid mismatch" otherwise).
std::vector<EnsembleSample> ensemble_average(
    const std::vector<TrajectoryRecord>& trajectories);

}  // namespace collide
