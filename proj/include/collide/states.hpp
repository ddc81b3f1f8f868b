#pragma once

#include "collide/linalg.hpp"

#include <optional>
#include <variant>

namespace collide {

// Hermitian, unit-trace, positive-semidefinite operator tagged with its
// tensor-product space. Validation happens once, at construction.
struct DensityMatrix {
  ComplexMatrix matrix;
  TensorSpace space;

  static DensityMatrix create(ComplexMatrix m, TensorSpace space);
  // Re-normalizes the trace (useful after long evolutions) but still insists
  // on Hermiticity and positivity.
  static DensityMatrix create_renormalized(ComplexMatrix m, TensorSpace space);

  Eigen::Index dim() const { return matrix.rows(); }
  DensityMatrix reduced(const std::vector<std::string>& keep) const;
};

DensityMatrix pure_state(const ComplexVector& psi, const TensorSpace& space);

// Qubit state entries in basis (|1>, |0>): matrix [[p, c], [c*, 1-p]].
struct QubitParams {
  double p = 0.0;
  Complex c = 0.0;
};

DensityMatrix qubit_density(const QubitParams& q);
QubitParams qubit_params(const DensityMatrix& rho);

// exp(-beta h) / Z. Only beta >= 0; inverted populations are expressed
// through explicit QubitParams instead.
DensityMatrix thermal_state(const ComplexMatrix& h, double beta,
                            const TensorSpace& space);

// Coherent state of amplitude alpha_n * sqrt(dt) on a d-level Fock space,
// normalized exactly after truncation.
DensityMatrix coherent_bin_state(Complex alpha_n, double dt, Eigen::Index d);

// --- ancilla sources ------------------------------------------------------

struct PureVector {
  ComplexVector amplitudes;
};
struct ThermalQubit {
  double beta = 0.0;
  double omega0 = 1.0;
};
struct ThermalOscillator {
  double beta = 0.0;
  double omega0 = 1.0;
  Eigen::Index d = 20;
};
struct CoherentBin {
  Complex alpha_n = 0.0;  // constant-amplitude bin
  double dt = 0.0;
  Eigen::Index d = 20;
};
// First and second moments of a Gaussian white-noise bin:
// <b> = beta_t sqrt(dt), <b^dag b> = N, <b b> = M, |M|^2 <= N(N+1).
struct GaussianMoments {
  Complex beta_t = 0.0;
  double N = 0.0;
  Complex M = 0.0;
};
// Single photon delocalized over time bins: sum_n c_n |1_n>.
struct SinglePhotonChain {
  std::vector<Complex> amplitudes;
};

using AncillaSpec = std::variant<PureVector, ThermalQubit, ThermalOscillator,
                                 CoherentBin, GaussianMoments, SinglePhotonChain>;

// Realize one ancilla state. GaussianMoments and SinglePhotonChain describe
// moment data / correlated chains rather than a single-bin density matrix;
// asking them for one is an error.
DensityMatrix ancilla_density(const AncillaSpec& spec, const TensorSpace& space);
Eigen::Index ancilla_dim(const AncillaSpec& spec);

// --- entropies (nats) -----------------------------------------------------

struct EntropyReport {
  double vonNeumann = 0.0;
  std::optional<double> relative;
  std::optional<double> mutual;
};

double entropy(const DensityMatrix& rho);
// Returns +infinity when support(rho) is not contained in support(rho_prime);
// that is the "relative entropy infinite" signal, not an exception.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& rho_prime);
double mutual_information(const DensityMatrix& rho_ab,
                          const std::vector<std::string>& part_a);

}  // namespace collide
